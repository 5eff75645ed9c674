#pragma once

// Per-cycle decision making for the four navigation policies. The semantic
// policies score every sub-region, order them and route through the best
// viewpoints of the leading region; the frontier baselines pick a frontier
// cell. Every policy locks onto the target as soon as it has been detected.

#include <cstdint>
#include <functional>
#include <optional>
#include <random>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "semnav/config.hpp"
#include "semnav/coverage_memory.hpp"
#include "semnav/occupancy_grid.hpp"
#include "semnav/region_evaluator.hpp"
#include "semnav/semantic_buffer.hpp"
#include "semnav/viewpoint_sampler.hpp"

namespace semnav {

enum class PolicyKind { NearestFrontier, RandomFrontier, GeometricOnly, Full };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> policy_from_string(std::string_view name);
std::vector<PolicyKind> baseline_policies();

/// Effective configuration for a policy. GeometricOnly zeroes lambda2 and
/// disables the semantic term; the other policies use cfg unchanged.
RunConfig policy_config(const RunConfig& cfg, PolicyKind kind);

struct PlanningInputs {
  const OccupancyGrid& grid;
  const RegionLayout& layout;
  const CoverageMemory& memory;
  std::span<const SemanticPoint> points;
  Vec2 robot;
  std::string target;
  double lock_radius;          // goal radius around a detected target
  std::uint64_t cycle_seed;    // drives viewpoint sampling
};

struct RegionEvaluation {
  std::vector<Viewpoint> viewpoints;   // every sampled viewpoint, scored
  std::vector<RegionScore> scores;     // indexed by region id
  std::vector<double> path_costs;      // indexed by region id, inf if unreachable
  std::vector<int> order;              // order_regions output
  std::optional<SemanticPoint> short_circuit;
};

/// Samples, scores and orders every non-worthless region. The distance field
/// must be rooted at the robot over known-free space. `consumed` holds keys of
/// semantic points already visited through a short circuit; it is ignored
/// unless `search_short_circuit` is set.
RegionEvaluation evaluate_regions(const PlanningInputs& in, const RunConfig& cfg, const DistanceField& from_robot,
                                  bool search_short_circuit, const std::set<SpatialKey>& consumed = {});

/// Known-free cells with an unknown 4-neighbour, in id order.
std::vector<CellIndex> frontier_cells(const OccupancyGrid& grid);

enum class GoalKind { None, Target, ShortCircuit, Viewpoint, Frontier };
std::string_view to_string(GoalKind kind);

struct Plan {
  GoalKind kind = GoalKind::None;
  Path path;               // robot cell first; at least two cells unless kind == None
  Vec2 goal{};
  int region_id = -1;      // region being explored, if any
  std::optional<Route> route;
  std::optional<RegionEvaluation> evaluation;  // semantic policies only
  std::optional<SemanticPoint> focus;           // target or short-circuit point
};

class Planner {
 public:
  /// `cfg` must already be adjusted with policy_config.
  Planner(PolicyKind kind, RunConfig cfg, std::uint64_t seed);

  /// Called on every cycle where regions were evaluated, before the plan is
  /// chosen. Used to compare policies on identical inputs.
  using CycleObserver = std::function<void(const PlanningInputs&, const RegionEvaluation&)>;
  void set_observer(CycleObserver observer) { observer_ = std::move(observer); }

  Plan plan(const PlanningInputs& in);

  /// Whether following `current` is still worthwhile given the new state.
  bool still_useful(const Plan& current, const PlanningInputs& in) const;

  /// Marks the focus of a finished short-circuit plan, and every point within
  /// r_xy of it, so that cluster is not chased again.
  void consume(const SemanticPoint& focus, std::span<const SemanticPoint> points);

  PolicyKind kind() const { return kind_; }
  const RunConfig& config() const { return cfg_; }

 private:
  std::optional<Plan> plan_target(const PlanningInputs& in, const DistanceField& field) const;
  std::optional<Plan> plan_frontier(const PlanningInputs& in, const DistanceField& field, bool random);
  std::optional<Plan> plan_regions(const PlanningInputs& in, const DistanceField& field);

  PolicyKind kind_;
  RunConfig cfg_;
  std::mt19937_64 rng_;
  std::set<SpatialKey> consumed_;
  CycleObserver observer_;
};

}  // namespace semnav
