#include "semnav/region_evaluator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace semnav {

void EvaluatorConfig::validate() const {
  if (!(r_xy > 0.0)) throw std::invalid_argument("evaluator.r_xy must be > 0");
  if (!(phase1_relevance_threshold > 0.0 && phase1_relevance_threshold <= 1.0)) {
    throw std::invalid_argument("evaluator.phase1_relevance_threshold must be in (0, 1]");
  }
}

double gaussian_weight(Vec2 p, Vec2 v, double r_xy) {
  // sigma^2 = r_xy^2 / 2
  const double sigma2 = 0.5 * r_xy * r_xy;
  return std::exp(-squared_distance(p, v) / sigma2);
}

double viewpoint_semantic_score(Vec2 v, std::span<const SemanticPoint> points, double r_xy) {
  const double r2 = r_xy * r_xy;
  double weighted = 0.0;
  double weights = 0.0;
  for (const auto& p : points) {
    const Vec2 q = p.position.planar();
    if (squared_distance(q, v) > r2) {
      continue;
    }
    const double w = gaussian_weight(q, v, r_xy);
    weighted += w * p.relevance;
    weights += w;
  }
  return weights > 0.0 ? weighted / weights : 0.0;
}

void annotate_semantic_scores(std::span<Viewpoint> viewpoints, std::span<const SemanticPoint> points,
                              const EvaluatorConfig& cfg) {
  for (auto& v : viewpoints) {
    v.s_bar = cfg.semantics_enabled ? viewpoint_semantic_score(v.position, points, cfg.r_xy) : 0.0;
  }
}

RegionScore region_score(const SubRegion& region, std::span<const Viewpoint> viewpoints,
                         std::span<const SemanticPoint> points, const EvaluatorConfig& cfg) {
  RegionScore score;
  score.region_id = region.id;
  const Viewpoint* best = nullptr;
  bool any = false;
  for (const auto& v : viewpoints) {
    if (v.region_id != region.id) {
      continue;
    }
    any = true;
    score.viewpoint_sum += v.s_viewpoint;
    if (cfg.semantics_enabled && cfg.aggregation == SemanticAggregation::SumAllViewpoints) {
      score.semantic_sum += viewpoint_semantic_score(v.position, points, cfg.r_xy);
    }
    if (best == nullptr || v.s_viewpoint > best->s_viewpoint ||
        (v.s_viewpoint == best->s_viewpoint && v.id < best->id)) {
      best = &v;
    }
  }
  if (!any) {
    return score;
  }
  if (cfg.semantics_enabled && cfg.aggregation == SemanticAggregation::SingleBest) {
    score.semantic_sum = viewpoint_semantic_score(best->position, points, cfg.r_xy);
  }
  score.total = score.viewpoint_sum + score.semantic_sum;
  score.activated = score.total >= cfg.activation_threshold;
  return score;
}

SearchOutcome two_phase_search(const SubRegion& region, std::span<const SemanticPoint> points,
                               const EvaluatorConfig& cfg) {
  const Vec2 c = region.bounds.center();
  const double radius = region.bounds.circumradius();
  std::vector<const SemanticPoint*> inside;
  for (const auto& p : points) {
    if (squared_distance(p.position.planar(), c) <= radius * radius) {
      inside.push_back(&p);
    }
  }
  std::stable_sort(inside.begin(), inside.end(),
                   [](const SemanticPoint* a, const SemanticPoint* b) { return a->relevance > b->relevance; });
  if (!inside.empty() && inside.front()->relevance >= cfg.phase1_relevance_threshold) {
    return ShortCircuit{*inside.front()};
  }
  return Scored{};
}

std::vector<int> order_regions(std::span<const RegionScore> scores, std::span<const RegionState> states,
                               std::span<const double> path_costs) {
  auto cost_of = [&](int id) {
    const auto i = static_cast<std::size_t>(id);
    return i < path_costs.size() ? path_costs[i] : std::numeric_limits<double>::infinity();
  };
  std::vector<const RegionScore*> keep;
  for (const auto& s : scores) {
    const auto i = static_cast<std::size_t>(s.region_id);
    const bool worthless = i < states.size() && states[i] == RegionState::Worthless;
    if (s.activated && !worthless) {
      keep.push_back(&s);
    }
  }
  std::sort(keep.begin(), keep.end(), [&](const RegionScore* a, const RegionScore* b) {
    if (a->total != b->total) return a->total > b->total;
    const double ca = cost_of(a->region_id);
    const double cb = cost_of(b->region_id);
    if (ca != cb) return ca < cb;
    return a->region_id < b->region_id;
  });
  std::vector<int> out;
  out.reserve(keep.size());
  for (const auto* s : keep) out.push_back(s->region_id);
  return out;
}

}  // namespace semnav
