#pragma once

// Subcommand implementations behind the semnav executable. Each returns the
// process exit code and writes diagnostics to `err`.
//
// Exit codes: 0 success, 1 runtime failure, 2 missing or malformed input
// file (scenario, map, manifest, trace), 3 invalid configuration.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "semnav/planner.hpp"
#include "semnav/scenario_gen.hpp"
#include "semnav/simulator.hpp"

namespace semnav::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitInput = 2;
inline constexpr int kExitConfig = 3;

struct RunOptions {
  std::filesystem::path scenario;
  std::optional<std::filesystem::path> config;
  std::filesystem::path out_dir;
  PolicyKind policy = PolicyKind::Full;
  std::optional<std::uint64_t> seed;  // overrides the scenario's seed
};
int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err);

/// Manifest (JSON):
///   {"schema_version": 1, "scenarios": ["a.json", ...], "policies": ["full", ...],
///    "seeds": [0, 1], "config": "run.json", "jobs": 1}
/// Paths are relative to the manifest. Writes episodes/<scenario>__<policy>__<seed>.json,
/// episodes.csv (one row per grid cell), metrics.csv (SR/SPL per policy) and
/// summary.txt (Full against every other policy).
struct BatchOptions {
  std::filesystem::path manifest;
  std::filesystem::path out_dir;
  std::optional<int> jobs;  // overrides the manifest
};
int cmd_batch(const BatchOptions& opts, std::ostream& out, std::ostream& err);

struct RenderCmdOptions {
  std::filesystem::path trace;
  std::filesystem::path out_image;
  std::optional<int> frame;  // default: last frame
  int pixels_per_cell = 4;
};
int cmd_render(const RenderCmdOptions& opts, std::ostream& out, std::ostream& err);

/// Writes scene_NNN.json plus scene_NNN.map per scenario and a manifest.json
/// covering every baseline policy and seeds 0..seeds-1.
struct GenOptions {
  std::filesystem::path out_dir;
  int count = 30;
  std::uint64_t seed = 1;
  int seeds = 5;
  std::optional<std::filesystem::path> generator_config;
  std::optional<std::string> run_config;  // recorded in the manifest as-is
};
int cmd_gen_scenarios(const GenOptions& opts, std::ostream& out, std::ostream& err);

/// Strict JSON reader for generator parameters; unknown keys are rejected.
GeneratorConfig parse_generator_config(const std::string& text);

/// Per-episode result document as persisted by run and batch.
std::string result_json(const EpisodeResult& r, const std::string& scenario, PolicyKind policy, std::uint64_t seed);
/// Inverse of result_json (only the fields metrics depend on).
EpisodeResult parse_result_json(const std::string& text);

}  // namespace semnav::cli
