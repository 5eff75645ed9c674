#pragma once

// Every tunable of a run, loadable from and serializable to JSON. Unknown keys
// are rejected and errors carry the line of the offending key.

#include <cstdint>
#include <filesystem>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>

#include "semnav/coverage_memory.hpp"
#include "semnav/occupancy_grid.hpp"
#include "semnav/region_evaluator.hpp"
#include "semnav/relevance.hpp"
#include "semnav/semantic_buffer.hpp"
#include "semnav/viewpoint_sampler.hpp"

namespace semnav {

inline constexpr int kConfigVersion = 1;

struct WorldConfig {
  double region_size = 4.0;  // meters
  /// Map reveal sensor: a forward sector matching the camera FOV, so the map
  /// only grows where the robot has actually looked. Coverage gain of a
  /// viewpoint is scored with the same range over a full circle.
  SensorModel lidar{4.0, 87.0 * std::numbers::pi / 180.0};
};

struct RelevanceSettings {
  std::string backend = "mock";  // "mock" or "remote"
  /// "builtin", "all_unrelated", or a path to a co-occurrence JSON file.
  std::string table = "builtin";
  BandTable bands{};
  std::size_t cache_capacity = 1024;
  double cache_ttl_seconds = 24.0 * 3600.0;
  std::set<std::string> stop_list{"wall", "floor", "ceiling", "background", "unknown", "object", "thing"};
  double temperature = 0.0;
  double timeout_seconds = 10.0;
};

struct DetectionConfig {
  bool noise = true;
  double confidence_min = 0.6;
  double confidence_max = 1.0;
  double position_sigma = 0.05;  // meters; jitter never exceeds this
  double false_negative_rate = 0.1;

  void validate() const;
};

struct EpisodeConfig {
  int replan_interval = 5;       // steps
  double step_duration = 0.2;    // seconds of episode clock per step
  /// Keep heading to the current exploration goal at periodic replans unless
  /// it stopped being useful.
  bool commit_to_goal = true;
  /// Minimum ground-truth distance from a randomized start to the target.
  double min_start_distance = 3.0;
  /// On reaching a viewpoint or frontier goal, turn in place until the lidar
  /// sector has swept a full circle (one step per turn, no distance
  /// travelled).
  bool scan_on_arrival = true;
};

struct RunConfig {
  int version = kConfigVersion;
  WorldConfig world{};
  BufferConfig buffer{};
  RelevanceSettings relevance{};
  SamplerConfig sampler{};
  EvaluatorConfig evaluator{};
  CoverageConfig coverage{};
  DetectionConfig detection{};
  EpisodeConfig episode{};

  /// Throws ConfigError describing the first violated invariant.
  void validate() const;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// `source` names the input in diagnostics ("<source>:<line>: message").
RunConfig parse_run_config(std::string_view text, std::string_view source = "<config>");
RunConfig load_run_config(const std::filesystem::path& path);
std::string serialize_run_config(const RunConfig& cfg);

}  // namespace semnav
