#pragma once

// Coverage-aware sub-region memory. Each region owns an N x N bitmap of cells
// seen through a planar sector FOV. Coverage accumulates only for the region
// the robot is in; on leaving, a region whose coverage ratio reached tau
// becomes Worthless for the rest of the episode. Entering a region activates
// it and clears its bitmap.

#include <cstddef>
#include <cstdint>
#include <numbers>
#include <memory>
#include <span>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/occupancy_grid.hpp"

namespace semnav {

enum class RegionState : std::uint8_t { Inactive, Active, Worthless };

struct FovModel {
  double radius = 4.0;                              // meters
  double angle = 87.0 * std::numbers::pi / 180.0;   // full sector angle, radians
  double min_displacement = 0.05;                   // meters

  void validate() const;
};

/// Bearing of curr - prev, or prev_heading when the move is shorter than
/// min_displacement.
double estimate_heading(Vec2 prev, Vec2 curr, double prev_heading, double min_displacement);

/// |g - pose| <= R and |angle(heading, g - pose)| <= angle / 2. No occlusion.
bool visible(Vec2 g, Vec2 pose, double heading, const FovModel& fov);

class RegionMemory {
 public:
  explicit RegionMemory(int n = 16);

  RegionState state = RegionState::Inactive;

  int n() const { return n_; }
  bool seen(int i, int j) const { return bits_[index(i, j)] != 0; }
  /// Returns true on a 0 -> 1 flip.
  bool mark(int i, int j);
  void reset();
  std::size_t seen_count() const { return seen_count_; }
  std::span<const std::uint8_t> bits() const { return bits_; }

 private:
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(j) * static_cast<std::size_t>(n_) + static_cast<std::size_t>(i); }

  int n_;
  std::vector<std::uint8_t> bits_;  // row-major, j is the row (y)
  std::size_t seen_count_ = 0;
};

/// |seen| / N^2.
double coverage_ratio(const RegionMemory& memory);

/// Center of bitmap cell (i, j) in world coordinates.
Vec2 bitmap_cell_center(const SubRegion& region, int n, int i, int j);

struct StateChange {
  int region_id;
  RegionState from;
  RegionState to;
};

struct CoverageConfig {
  int bitmap_n = 16;
  FovModel fov{};
  double tau = 0.8;
  /// Gate visibility on line of sight through the true map.
  bool occlusion_aware = false;

  void validate() const;
};

class CoverageMemory {
 public:
  /// `truth` is only consulted when occlusion_aware is set.
  CoverageMemory(std::vector<SubRegion> regions, CoverageConfig cfg, std::shared_ptr<const TruthMap> truth = nullptr);

  /// Marks every bitmap cell of `region_id` visible from the pose; returns the
  /// number of newly seen cells. Never changes states.
  std::size_t accumulate(int region_id, Vec2 pose, double heading);

  /// Leaving region becomes Worthless if its coverage reached tau; the
  /// entered region (unless Worthless) becomes Active with a cleared bitmap
  /// and one immediate accumulation from the pose. No-op when leaving ==
  /// entering. `leaving` may be -1 for the initial entry.
  std::vector<StateChange> on_region_transition(int leaving, int entering, Vec2 pose, double heading);

  RegionState state(int region_id) const { return memories_.at(static_cast<std::size_t>(region_id)).state; }
  const RegionMemory& memory(int region_id) const { return memories_.at(static_cast<std::size_t>(region_id)); }
  double coverage(int region_id) const { return coverage_ratio(memory(region_id)); }
  /// States indexed by region id.
  std::vector<RegionState> states() const;
  std::size_t size() const { return memories_.size(); }
  const CoverageConfig& config() const { return cfg_; }

 private:
  std::vector<SubRegion> regions_;
  CoverageConfig cfg_;
  std::shared_ptr<const TruthMap> truth_;
  std::vector<RegionMemory> memories_;
};

}  // namespace semnav
