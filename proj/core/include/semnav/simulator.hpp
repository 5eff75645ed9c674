#pragma once

// Closed-loop episodes: perceive, buffer, fuse, remember, plan, move one
// cell. Also detection emulation and SR/SPL aggregation.

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <memory>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semnav/config.hpp"
#include "semnav/planner.hpp"
#include "semnav/relevance.hpp"
#include "semnav/scenario.hpp"

namespace semnav {

inline constexpr int kTraceSchemaVersion = 1;

/// Objects inside the FOV sector with line of sight through the true map.
/// With noise off every such object is reported at its true position with
/// confidence 1; with noise on, confidence is uniform in [min, max] and the
/// planar position is jittered by at most position_sigma. Each visible object
/// is independently missed with probability false_negative_rate.
std::vector<Detection> detect(const Pose& pose, std::span<const SceneObject> objects, const TruthMap& truth,
                              const FovModel& fov, const DetectionConfig& noise, double timestamp,
                              std::mt19937_64& rng);

enum class Termination { Found, StepBudget, NoPlan };
std::string_view to_string(Termination t);
std::optional<Termination> termination_from_string(std::string_view name);

struct EpisodeResult {
  bool success = false;
  double path_length = 0.0;      // p, meters
  double oracle_shortest = 0.0;  // l, meters on the true map; 0 when unreachable
  bool oracle_reachable = false;
  int steps = 0;
  Termination termination = Termination::NoPlan;
  std::string target;            // empty when the instruction did not parse
  bool target_detected = false;
  int planning_cycles = 0;
  std::size_t degradation_events = 0;
  Pose start{};
};

struct Metrics {
  double sr = 0.0;
  double spl = 0.0;
  std::size_t episodes = 0;
};

/// S * l / max(p, l); 1 for a success with p = l = 0.
double spl_term(const EpisodeResult& r);
/// Throws std::invalid_argument on an empty input.
Metrics compute_metrics(std::span<const EpisodeResult> results);

/// Mock backend built from the configured table and bands.
std::shared_ptr<MockBackend> make_mock_backend(const RelevanceSettings& settings);
/// Engine per the configuration. A "remote" backend reads its endpoint from
/// the environment and throws ConfigError when none is set.
std::unique_ptr<RelevanceEngine> make_relevance_engine(const RelevanceSettings& settings, Clock clock,
                                                       std::unique_ptr<RelevanceBackend> primary = nullptr);

struct EpisodeOptions {
  std::ostream* trace = nullptr;      // JSONL, one header plus one record per step
  Planner::CycleObserver observer;    // semantic policies only
  /// Overrides the configured primary backend (tests, custom transports).
  std::function<std::unique_ptr<RelevanceBackend>()> backend_factory;
};

/// Start pose used when the scenario leaves it unset: a free cell with a true
/// path to the target of at least min_distance meters when one exists.
Pose draw_start(const Scenario& scenario, const std::string& target, double min_distance, std::uint64_t seed);

EpisodeResult run_episode(const Scenario& scenario, PolicyKind policy, const RunConfig& cfg,
                          const EpisodeOptions& options = {});

}  // namespace semnav
