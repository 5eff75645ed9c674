#pragma once

// Viewpoint generation and dual-metric scoring: geometric coverage (count of
// cells a sensor at the viewpoint would newly observe), semantic density
// (count of valid semantic points in a planar disk), and their weighted sum.

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "semnav/occupancy_grid.hpp"
#include "semnav/semantic_buffer.hpp"

namespace semnav {

struct Viewpoint {
  int id = 0;
  int region_id = -1;
  Vec2 position{};
  double s_cov = 0.0;
  double s_sem_density = 0.0;
  double s_viewpoint = 0.0;
  double s_bar = 0.0;  // filled by the region evaluator
};

struct SamplerConfig {
  int samples_per_region = 40;
  double density_radius = 2.0;  // meters
  double lambda1 = 1.0;
  double lambda2 = 2.0;
  int keep_k = 5;
  /// Points below this relevance are treated as meaningless for density.
  double min_valid_relevance = 0.2;
  /// Viewpoints revealing fewer cells than this are not worth routing to.
  int min_coverage_gain = 5;
  SensorModel sensor{};  // omnidirectional by default

  void validate() const;
};

/// Positions drawn uniformly over the known-free cells of the region (a cell
/// is picked uniformly, then a point uniformly inside the part of the cell
/// that lies in the region). Reproducible per (seed, region id).
std::vector<Viewpoint> sample_viewpoints(const SubRegion& region, const OccupancyGrid& grid,
                                         const SamplerConfig& cfg, std::uint64_t seed);

/// Cells a sensor at v would newly observe. Never mutates the grid.
std::size_t score_coverage(Vec2 v, const OccupancyGrid& grid, const SensorModel& sensor);

/// Whether a point counts toward semantic density.
inline bool valid_semantic_point(const SemanticPoint& p, double min_valid_relevance) {
  return !p.label.empty() && p.relevance >= min_valid_relevance;
}

/// Valid points with planar distance <= r (z ignored, closed disk).
std::size_t score_semantic_density(Vec2 v, std::span<const SemanticPoint> points, double r,
                                   double min_valid_relevance);

/// lambda1 * s_cov + lambda2 * s_sem_density.
inline double score_viewpoint(double s_cov, double s_sem_density, double lambda1, double lambda2) {
  return lambda1 * s_cov + lambda2 * s_sem_density;
}

/// Fills s_cov, s_sem_density and s_viewpoint in place.
void score_viewpoints(std::span<Viewpoint> viewpoints, const OccupancyGrid& grid,
                      std::span<const SemanticPoint> points, const SamplerConfig& cfg);

struct Route {
  std::vector<Viewpoint> stops;  // visiting order
  std::vector<Path> legs;        // legs[i] ends at stops[i]
  double cost = 0.0;             // meters
};

/// Keeps the top keep_k viewpoints by s_viewpoint (ties: lower id) among those
/// reachable from `robot` through known-free space, then orders them as the
/// cheapest open tour from the robot. Exhaustive for up to 7 stops, greedy
/// nearest-neighbour beyond. Empty when nothing is reachable.
Route select_and_link(std::span<const Viewpoint> viewpoints, const OccupancyGrid& grid, Vec2 robot, int keep_k);

/// splitmix64 finalizer; used to derive per-region and per-cycle seeds.
std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b);

}  // namespace semnav
