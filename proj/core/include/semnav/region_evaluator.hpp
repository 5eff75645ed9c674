#pragma once

// Region-level evaluation: Gaussian-decay semantic relevance per viewpoint,
// sub-region aggregate score with threshold activation, the two-phase
// semantic search, and greedy ordering of activated regions.

#include <span>
#include <variant>
#include <vector>

#include "semnav/coverage_memory.hpp"
#include "semnav/occupancy_grid.hpp"
#include "semnav/semantic_buffer.hpp"
#include "semnav/viewpoint_sampler.hpp"

namespace semnav {

/// How per-viewpoint semantic scores enter the region score.
enum class SemanticAggregation {
  SumAllViewpoints,  // sum of S-bar over every viewpoint in the region
  SingleBest,        // S-bar of the highest-scoring viewpoint only
};

struct EvaluatorConfig {
  double r_xy = 2.0;  // viewpoint neighbourhood radius, meters
  double activation_threshold = 1.0;
  double phase1_relevance_threshold = 0.9;
  SemanticAggregation aggregation = SemanticAggregation::SumAllViewpoints;
  /// When false the semantic term is zero (geometry-only ablation).
  bool semantics_enabled = true;

  void validate() const;
};

struct RegionScore {
  int region_id = -1;
  double viewpoint_sum = 0.0;
  double semantic_sum = 0.0;
  double total = 0.0;
  bool activated = false;
};

/// exp(-|p - v|^2 / sigma^2) with sigma = (sqrt(2) / 2) * r_xy, planar.
double gaussian_weight(Vec2 p, Vec2 v, double r_xy);

/// Gaussian-weighted mean relevance of the points within planar distance
/// r_xy of v; 0 when the neighbourhood is empty.
double viewpoint_semantic_score(Vec2 v, std::span<const SemanticPoint> points, double r_xy);

/// Scores one region from its viewpoints (those with region_id == region.id).
/// Viewpoints must already carry s_viewpoint.
RegionScore region_score(const SubRegion& region, std::span<const Viewpoint> viewpoints,
                         std::span<const SemanticPoint> points, const EvaluatorConfig& cfg);

/// Writes S-bar into each viewpoint's s_bar field.
void annotate_semantic_scores(std::span<Viewpoint> viewpoints, std::span<const SemanticPoint> points,
                              const EvaluatorConfig& cfg);

struct ShortCircuit {
  SemanticPoint point;
};
struct Scored {};
using SearchOutcome = std::variant<Scored, ShortCircuit>;

/// Phase 1 scans the points inside the region's circumscribed circle in
/// descending relevance; if the strongest reaches the phase-1 threshold it is
/// returned directly. Otherwise phase 2 (region_score) applies.
SearchOutcome two_phase_search(const SubRegion& region, std::span<const SemanticPoint> points,
                               const EvaluatorConfig& cfg);

/// Activated, non-worthless regions sorted by total (descending), then path
/// cost from the robot (ascending), then id. `states` and `path_costs` are
/// indexed by region id; missing entries mean Inactive / infinite cost.
std::vector<int> order_regions(std::span<const RegionScore> scores, std::span<const RegionState> states,
                               std::span<const double> path_costs);

}  // namespace semnav
