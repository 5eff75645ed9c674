#include "semnav/planner.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace semnav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Summed-area table of unknown cells, used to skip coverage scoring for
// regions with nothing left to observe within sensor range.
class UnknownCounter {
 public:
  explicit UnknownCounter(const OccupancyGrid& grid) : g_(grid.geometry()) {
    const auto w = static_cast<std::size_t>(g_.width) + 1;
    sum_.assign(w * (static_cast<std::size_t>(g_.height) + 1), 0);
    for (int y = 0; y < g_.height; ++y) {
      for (int x = 0; x < g_.width; ++x) {
        const int unknown = grid.observed({x, y}) ? 0 : 1;
        at(x + 1, y + 1) = at(x, y + 1) + at(x + 1, y) - at(x, y) + unknown;
      }
    }
  }

  bool any_in(const Rect& r) const {
    const CellIndex lo = g_.cell_of({r.min_x, r.min_y});
    const CellIndex hi = g_.cell_of({r.max_x, r.max_y});
    const int x0 = std::clamp(lo.x, 0, g_.width);
    const int y0 = std::clamp(lo.y, 0, g_.height);
    const int x1 = std::clamp(hi.x + 1, 0, g_.width);
    const int y1 = std::clamp(hi.y + 1, 0, g_.height);
    if (x0 >= x1 || y0 >= y1) return false;
    return at(x1, y1) - at(x0, y1) - at(x1, y0) + at(x0, y0) > 0;
  }

 private:
  int& at(int x, int y) { return sum_[static_cast<std::size_t>(y) * (static_cast<std::size_t>(g_.width) + 1) + static_cast<std::size_t>(x)]; }
  int at(int x, int y) const { return sum_[static_cast<std::size_t>(y) * (static_cast<std::size_t>(g_.width) + 1) + static_cast<std::size_t>(x)]; }

  GridGeometry g_;
  std::vector<int> sum_;
};

// Path to the cheapest reachable known-free cell within `radius` of any of
// `anchors`. Failing that, to the reachable cell nearest (planar) to an anchor
// so the approach continues as the map opens up. nullopt when the robot is
// already as close as it can get.
std::optional<Path> approach(const OccupancyGrid& grid, const DistanceField& field, std::span<const Vec2> anchors,
                             double radius) {
  const GridGeometry& g = grid.geometry();
  const double r2 = radius * radius;
  CellIndex best{};
  double best_cost = kInf;
  CellIndex near{};
  double near_d2 = kInf;
  double near_cost = kInf;
  for (std::size_t id = 0; id < g.cell_count(); ++id) {
    const CellIndex c = g.cell_at(id);
    if (!field.reachable(c)) continue;
    const Vec2 p = g.center_of(c);
    double d2 = kInf;
    for (const Vec2 a : anchors) d2 = std::min(d2, squared_distance(a, p));
    const double cost = field.cost(c);
    if (d2 <= r2 && cost < best_cost) {
      best = c;
      best_cost = cost;
    }
    if (d2 < near_d2 || (d2 == near_d2 && cost < near_cost)) {
      near = c;
      near_d2 = d2;
      near_cost = cost;
    }
  }
  const CellIndex goal = best_cost < kInf ? best : near;
  if (near_cost == kInf || goal == field.source()) return std::nullopt;
  return field.path_to(goal);
}

bool is_frontier(const OccupancyGrid& grid, CellIndex c) {
  if (!grid.known_free(c)) return false;
  const GridGeometry& g = grid.geometry();
  constexpr int dx[4] = {1, -1, 0, 0};
  constexpr int dy[4] = {0, 0, 1, -1};
  for (int k = 0; k < 4; ++k) {
    const CellIndex n{c.x + dx[k], c.y + dy[k]};
    if (g.in_bounds(n) && !grid.observed(n)) return true;
  }
  return false;
}

}  // namespace

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::NearestFrontier: return "nearest_frontier";
    case PolicyKind::RandomFrontier: return "random_frontier";
    case PolicyKind::GeometricOnly: return "geometric_only";
    case PolicyKind::Full: return "full";
  }
  return "unknown";
}

std::optional<PolicyKind> policy_from_string(std::string_view name) {
  for (const auto k : baseline_policies()) {
    if (to_string(k) == name) return k;
  }
  return std::nullopt;
}

std::vector<PolicyKind> baseline_policies() {
  return {PolicyKind::NearestFrontier, PolicyKind::RandomFrontier, PolicyKind::GeometricOnly, PolicyKind::Full};
}

RunConfig policy_config(const RunConfig& cfg, PolicyKind kind) {
  RunConfig out = cfg;
  if (kind == PolicyKind::GeometricOnly) {
    out.sampler.lambda2 = 0.0;
    out.evaluator.semantics_enabled = false;
  }
  return out;
}

std::string_view to_string(GoalKind kind) {
  switch (kind) {
    case GoalKind::None: return "none";
    case GoalKind::Target: return "target";
    case GoalKind::ShortCircuit: return "short_circuit";
    case GoalKind::Viewpoint: return "viewpoint";
    case GoalKind::Frontier: return "frontier";
  }
  return "unknown";
}

std::vector<CellIndex> frontier_cells(const OccupancyGrid& grid) {
  const GridGeometry& g = grid.geometry();
  std::vector<CellIndex> out;
  for (std::size_t id = 0; id < g.cell_count(); ++id) {
    const CellIndex c = g.cell_at(id);
    if (is_frontier(grid, c)) out.push_back(c);
  }
  return out;
}

RegionEvaluation evaluate_regions(const PlanningInputs& in, const RunConfig& cfg, const DistanceField& from_robot,
                                  bool search_short_circuit, const std::set<SpatialKey>& consumed) {
  RegionEvaluation ev;
  const std::size_t n = in.layout.size();
  ev.scores.resize(n);
  ev.path_costs.assign(n, kInf);
  const auto states = in.memory.states();
  const UnknownCounter unknown(in.grid);
  const GridGeometry& g = in.grid.geometry();
  const double reach = cfg.sampler.sensor.range + g.cell_size;

  for (const auto& region : in.layout.regions()) {
    const auto rid = static_cast<std::size_t>(region.id);
    ev.scores[rid].region_id = region.id;
    if (states[rid] == RegionState::Worthless) continue;

    auto vps = sample_viewpoints(region, in.grid, cfg.sampler, in.cycle_seed);
    const Rect& b = region.bounds;
    if (unknown.any_in({b.min_x - reach, b.min_y - reach, b.max_x + reach, b.max_y + reach})) {
      score_viewpoints(vps, in.grid, in.points, cfg.sampler);
    } else {
      // Nothing unknown within range: coverage is zero for every sample.
      for (auto& v : vps) {
        v.s_cov = 0.0;
        v.s_sem_density = cfg.sampler.lambda2 == 0.0
                              ? 0.0
                              : static_cast<double>(score_semantic_density(v.position, in.points,
                                                                           cfg.sampler.density_radius,
                                                                           cfg.sampler.min_valid_relevance));
        v.s_viewpoint = score_viewpoint(v.s_cov, v.s_sem_density, cfg.sampler.lambda1, cfg.sampler.lambda2);
      }
    }
    annotate_semantic_scores(vps, in.points, cfg.evaluator);
    ev.scores[rid] = region_score(region, vps, in.points, cfg.evaluator);
    for (const auto& v : vps) {
      if (v.s_cov >= cfg.sampler.min_coverage_gain) ev.path_costs[rid] = std::min(ev.path_costs[rid], from_robot.cost(g.cell_of(v.position)));
    }
    ev.viewpoints.insert(ev.viewpoints.end(), vps.begin(), vps.end());
  }
  ev.order = order_regions(ev.scores, states, ev.path_costs);

  if (search_short_circuit) {
    std::vector<SemanticPoint> open;
    for (const auto& p : in.points) {
      if (p.label != in.target && !consumed.count(spatial_key(p.position.x, p.position.y, cfg.buffer.hash_cell))) {
        open.push_back(p);
      }
    }
    for (const auto& region : in.layout.regions()) {
      if (states[static_cast<std::size_t>(region.id)] == RegionState::Worthless) continue;
      const auto outcome = two_phase_search(region, open, cfg.evaluator);
      if (const auto* sc = std::get_if<ShortCircuit>(&outcome)) {
        if (!ev.short_circuit || sc->point.relevance > ev.short_circuit->relevance) ev.short_circuit = sc->point;
      }
    }
  }
  return ev;
}

Planner::Planner(PolicyKind kind, RunConfig cfg, std::uint64_t seed)
    : kind_(kind), cfg_(std::move(cfg)), rng_(mix_seed(seed, 0x706c616eULL)) {}

void Planner::consume(const SemanticPoint& focus, std::span<const SemanticPoint> points) {
  consumed_.insert(spatial_key(focus.position.x, focus.position.y, cfg_.buffer.hash_cell));
  for (const auto& p : points) {
    if (distance(p.position.planar(), focus.position.planar()) <= cfg_.evaluator.r_xy) {
      consumed_.insert(spatial_key(p.position.x, p.position.y, cfg_.buffer.hash_cell));
    }
  }
}

Plan Planner::plan(const PlanningInputs& in) {
  const GridGeometry& g = in.grid.geometry();
  const DistanceField field(in.grid, g.cell_of(in.robot), PathMode::KnownFreeOnly);
  if (auto p = plan_target(in, field)) return std::move(*p);
  std::optional<Plan> p;
  switch (kind_) {
    case PolicyKind::NearestFrontier: p = plan_frontier(in, field, false); break;
    case PolicyKind::RandomFrontier: p = plan_frontier(in, field, true); break;
    case PolicyKind::GeometricOnly:
    case PolicyKind::Full: p = plan_regions(in, field); break;
  }
  return p ? std::move(*p) : Plan{};
}

std::optional<Plan> Planner::plan_target(const PlanningInputs& in, const DistanceField& field) const {
  std::vector<Vec2> anchors;
  std::optional<SemanticPoint> focus;
  for (const auto& p : in.points) {
    if (p.label == in.target) {
      anchors.push_back(p.position.planar());
      if (!focus) focus = p;
    }
  }
  if (anchors.empty()) return std::nullopt;
  auto path = approach(in.grid, field, anchors, in.lock_radius);
  if (!path) return std::nullopt;
  Plan plan;
  plan.kind = GoalKind::Target;
  plan.goal = in.grid.geometry().center_of(path->cells.back());
  plan.path = std::move(*path);
  plan.focus = focus;
  return plan;
}

std::optional<Plan> Planner::plan_frontier(const PlanningInputs& in, const DistanceField& field, bool random) {
  std::vector<CellIndex> reachable;
  for (const CellIndex c : frontier_cells(in.grid)) {
    if (c != field.source() && field.reachable(c)) reachable.push_back(c);
  }
  if (reachable.empty()) return std::nullopt;
  CellIndex goal = reachable.front();
  if (random) {
    std::uniform_int_distribution<std::size_t> pick(0, reachable.size() - 1);
    goal = reachable[pick(rng_)];
  } else {
    for (const CellIndex c : reachable) {
      if (field.cost(c) < field.cost(goal)) goal = c;
    }
  }
  Plan plan;
  plan.kind = GoalKind::Frontier;
  plan.path = *field.path_to(goal);
  plan.goal = in.grid.geometry().center_of(goal);
  plan.region_id = in.layout.region_at(plan.goal);
  return plan;
}

std::optional<Plan> Planner::plan_regions(const PlanningInputs& in, const DistanceField& field) {
  const bool full = kind_ == PolicyKind::Full;
  RegionEvaluation ev = evaluate_regions(in, cfg_, field, full, consumed_);
  if (observer_) observer_(in, ev);
  const GridGeometry& g = in.grid.geometry();

  if (ev.short_circuit) {
    const Vec2 anchor = ev.short_circuit->position.planar();
    if (auto path = approach(in.grid, field, std::span<const Vec2>(&anchor, 1), in.lock_radius)) {
      Plan plan;
      plan.kind = GoalKind::ShortCircuit;
      plan.goal = g.center_of(path->cells.back());
      plan.path = std::move(*path);
      plan.region_id = in.layout.region_at(anchor);
      plan.focus = ev.short_circuit;
      plan.evaluation = std::move(ev);
      return plan;
    }
    // Already as close as the known map allows.
    consume(*ev.short_circuit, in.points);
  }

  for (const int rid : ev.order) {
    std::vector<Viewpoint> candidates;
    for (const auto& v : ev.viewpoints) {
      if (v.region_id == rid && v.s_cov >= cfg_.sampler.min_coverage_gain && g.cell_of(v.position) != field.source()) candidates.push_back(v);
    }
    Route route = select_and_link(candidates, in.grid, in.robot, cfg_.sampler.keep_k);
    if (route.stops.empty()) continue;
    Plan plan;
    plan.kind = GoalKind::Viewpoint;
    plan.path = route.legs.front();
    plan.goal = g.center_of(plan.path.cells.back());
    plan.region_id = rid;
    plan.route = std::move(route);
    plan.evaluation = std::move(ev);
    return plan;
  }

  auto fallback = plan_frontier(in, field, false);
  if (fallback) fallback->evaluation = std::move(ev);
  return fallback;
}

bool Planner::still_useful(const Plan& current, const PlanningInputs& in) const {
  if (current.kind == GoalKind::None) return false;
  if (current.kind != GoalKind::Target) {
    for (const auto& p : in.points) {
      if (p.label == in.target) return false;
    }
  }
  switch (current.kind) {
    case GoalKind::None: return false;
    case GoalKind::Target:
    case GoalKind::ShortCircuit: return true;
    case GoalKind::Viewpoint:
      if (current.region_id >= 0 && in.memory.state(current.region_id) == RegionState::Worthless) return false;
      return score_coverage(current.goal, in.grid, cfg_.sampler.sensor) >=
             static_cast<std::size_t>(cfg_.sampler.min_coverage_gain);
    case GoalKind::Frontier: return is_frontier(in.grid, in.grid.geometry().cell_of(current.goal));
  }
  return false;
}

}  // namespace semnav
