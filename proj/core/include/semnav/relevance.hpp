#pragma once

// Instruction parsing and target-relevance scoring. Scores come from a
// pluggable backend (a deterministic co-occurrence table, or a remote LLM
// endpoint) and are constrained to rigid relevance bands. Results are cached
// in an LRU cache with a 24 h TTL; the clock is injected.

#include <array>
#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "semnav/labels.hpp"
#include "semnav/lru_ttl_cache.hpp"

namespace semnav {

enum class RelevanceBand { SameSceneStrong = 0, SceneRelated = 1, WeaklyRelated = 2, Unrelated = 3 };

std::string_view to_string(RelevanceBand band);
std::optional<RelevanceBand> band_from_string(std::string_view name);

struct BandRange {
  double lo = 0.0;
  double hi = 0.0;
  double midpoint() const { return 0.5 * (lo + hi); }
};

/// Score interval per band; strongest first, non-overlapping, descending.
class BandTable {
 public:
  /// [0.75, 1.0] / [0.5, 0.75) / [0.2, 0.5) / [0, 0.2).
  BandTable();
  explicit BandTable(std::array<BandRange, 4> ranges);

  const BandRange& range(RelevanceBand band) const { return ranges_[static_cast<std::size_t>(band)]; }
  const std::array<BandRange, 4>& ranges() const { return ranges_; }
  /// Deterministic score the mock backend emits for a band.
  double value(RelevanceBand band) const { return range(band).midpoint(); }
  /// True if score lies in the band's half-open range (closed for the top band).
  bool contains(RelevanceBand band, double score) const;

  /// Throws std::invalid_argument if the ordering invariants are violated.
  void validate() const;

 private:
  std::array<BandRange, 4> ranges_;
};

/// A group of objects that share a typical scene.
struct SceneKit {
  std::string name;
  std::vector<std::string> objects;
};

/// Built-in scene kits (office, bedroom, kitchen, ...).
const std::vector<SceneKit>& builtin_kits();

/// Directional (label, target) -> band table for the mock backend.
class CooccurrenceTable {
 public:
  CooccurrenceTable() = default;

  void set(std::string label, std::string target, RelevanceBand band);
  /// Unrelated when the pair is not listed.
  RelevanceBand band(const std::string& label, const std::string& target) const;

  /// Every label or target mentioned in the table, plus registered vocabulary.
  const std::set<std::string>& vocabulary() const { return vocabulary_; }
  void add_vocabulary(std::string label) { vocabulary_.insert(std::move(label)); }

  /// Kit-derived table: same kit -> SameSceneStrong; related kits ->
  /// SceneRelated or WeaklyRelated; everything else Unrelated.
  static CooccurrenceTable builtin();
  /// Every pair Unrelated, same vocabulary as builtin().
  static CooccurrenceTable all_unrelated();

  /// {"pairs": [{"label","target","band"}], "vocabulary": [...]}.
  static CooccurrenceTable from_json(std::string_view text);

 private:
  std::map<std::pair<std::string, std::string>, RelevanceBand> pairs_;
  std::set<std::string> vocabulary_;
};

/// Instruction text resolved to no known object label.
class ParseFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Transport failure, timeout, or malformed reply from a backend.
class BackendError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class RelevanceBackend {
 public:
  virtual ~RelevanceBackend() = default;
  virtual std::string name() const = 0;
  /// Canonical target label. Throws ParseFailure or BackendError.
  virtual std::string parse(std::string_view instruction) = 0;
  /// Score per label in [0, 1]. Throws BackendError.
  virtual std::map<std::string, double> score(const std::vector<std::string>& labels,
                                              const std::string& target) = 0;
};

class MockBackend final : public RelevanceBackend {
 public:
  MockBackend(CooccurrenceTable table, BandTable bands, std::map<std::string, std::string> aliases = {});

  std::string name() const override { return "mock"; }
  /// Longest vocabulary/alias phrase found as whole words; earliest wins ties.
  /// Underscores in labels also match spaces ("fire extinguisher").
  std::string parse(std::string_view instruction) override;
  std::map<std::string, double> score(const std::vector<std::string>& labels, const std::string& target) override;

  const CooccurrenceTable& table() const { return table_; }

 private:
  CooccurrenceTable table_;
  BandTable bands_;
  std::vector<std::pair<std::string, std::string>> phrases_;  // phrase -> label
};

/// Default alias table (fridge -> refrigerator, couch -> sofa, ...).
std::map<std::string, std::string> default_aliases();

struct RemoteConfig {
  std::string endpoint;      // http://host[:port]/path
  std::string api_key;       // sent as a bearer token when non-empty
  double timeout_seconds = 10.0;
  double temperature = 0.0;
  std::vector<std::string> vocabulary;
  BandTable bands;

  /// SEMNAV_LLM_ENDPOINT, SEMNAV_LLM_API_KEY, SEMNAV_LLM_TIMEOUT_S.
  /// nullopt when no endpoint is configured.
  static std::optional<RemoteConfig> from_env();
};

/// HTTP JSON client. Request: {"template_id", "variables": {...},
/// "temperature"}. Reply: {"answer": str, "scores": {label: value}}.
class RemoteBackend final : public RelevanceBackend {
 public:
  explicit RemoteBackend(RemoteConfig cfg);
  ~RemoteBackend() override;

  std::string name() const override { return "remote"; }
  std::string parse(std::string_view instruction) override;
  std::map<std::string, double> score(const std::vector<std::string>& labels, const std::string& target) override;

 private:
  struct Impl;
  RemoteConfig cfg_;
  std::unique_ptr<Impl> impl_;
};

/// Versioned prompt templates shipped with the library.
enum class PromptTemplate { ParseInstruction, RelevanceEval };
std::string_view template_id(PromptTemplate t);
std::string_view template_text(PromptTemplate t);
/// Replaces every {{name}} with vars[name]; unknown placeholders stay as-is.
std::string render_template(std::string_view text, const std::map<std::string, std::string>& vars);
/// Human-readable band instructions embedded into the relevance prompt.
std::string describe_bands(const BandTable& bands);

struct DegradationEvent {
  std::string operation;  // "parse" or "score"
  std::string reason;
};

struct EngineConfig {
  std::size_t cache_capacity = 1024;
  double cache_ttl_seconds = 24.0 * 3600.0;
  std::set<std::string> stop_list;
};

using Clock = std::function<double()>;

class RelevanceEngine {
 public:
  /// `primary` may be null, in which case `fallback` serves every request.
  RelevanceEngine(std::unique_ptr<RelevanceBackend> primary, std::shared_ptr<MockBackend> fallback,
                  EngineConfig cfg, Clock clock);

  /// Throws ParseFailure when no label can be resolved.
  std::string parse_instruction(std::string_view text);

  /// Labels are sanitized first; the target itself always scores 1.0.
  std::map<std::string, double> score(const std::vector<std::string>& labels, const std::string& target);

  std::vector<std::string> sanitize(const std::vector<std::string>& raw) const { return sanitizer_.sanitize_all(raw); }
  const LabelSanitizer& sanitizer() const { return sanitizer_; }

  std::vector<DegradationEvent> degradation_events() const;
  std::size_t backend_calls() const { return backend_calls_; }
  std::size_t cache_size() const { return score_cache_.size(); }

 private:
  std::unique_ptr<RelevanceBackend> primary_;
  std::shared_ptr<MockBackend> fallback_;
  LabelSanitizer sanitizer_;
  Clock clock_;
  LruTtlCache<std::pair<std::string, std::string>, double> score_cache_;
  LruTtlCache<std::string, std::string> parse_cache_;
  mutable std::mutex events_mu_;
  std::vector<DegradationEvent> events_;
  std::size_t backend_calls_ = 0;
};

}  // namespace semnav
