#include "semnav/viewpoint_sampler.hpp"

#include <algorithm>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>

namespace semnav {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

}  // namespace

void SamplerConfig::validate() const {
  if (samples_per_region < 0) throw std::invalid_argument("sampler.samples_per_region must be >= 0");
  if (!(density_radius > 0.0)) throw std::invalid_argument("sampler.density_radius must be > 0");
  if (lambda1 < 0.0 || lambda2 < 0.0) throw std::invalid_argument("sampler lambdas must be >= 0");
  if (lambda1 == 0.0 && lambda2 == 0.0) throw std::invalid_argument("sampler lambdas cannot both be 0");
  if (keep_k < 1) throw std::invalid_argument("sampler.keep_k must be >= 1");
  if (min_coverage_gain < 1) throw std::invalid_argument("sampler.min_coverage_gain must be >= 1");
  if (!(sensor.range > 0.0)) throw std::invalid_argument("sensor range must be > 0");
}

std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  std::uint64_t z = a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2));
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::vector<Viewpoint> sample_viewpoints(const SubRegion& region, const OccupancyGrid& grid,
                                         const SamplerConfig& cfg, std::uint64_t seed) {
  const GridGeometry& g = grid.geometry();
  const Rect& b = region.bounds;
  const CellIndex lo = g.cell_of({b.min_x, b.min_y});
  const CellIndex hi = g.cell_of({b.max_x, b.max_y});
  std::vector<CellIndex> free_cells;
  for (int y = std::max(lo.y, 0); y <= std::min(hi.y, g.height - 1); ++y) {
    for (int x = std::max(lo.x, 0); x <= std::min(hi.x, g.width - 1); ++x) {
      const CellIndex c{x, y};
      if (grid.known_free(c) && b.contains(g.center_of(c))) {
        free_cells.push_back(c);
      }
    }
  }
  std::vector<Viewpoint> out;
  if (free_cells.empty()) {
    return out;
  }
  std::mt19937_64 rng(mix_seed(seed, static_cast<std::uint64_t>(region.id)));
  out.reserve(static_cast<std::size_t>(cfg.samples_per_region));
  for (int i = 0; i < cfg.samples_per_region; ++i) {
    const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(free_cells.size()));
    const CellIndex c = free_cells[std::min(pick, free_cells.size() - 1)];
    const Vec2 corner{g.origin.x + c.x * g.cell_size, g.origin.y + c.y * g.cell_size};
    // Restrict to the part of the cell inside the region.
    const double x0 = std::max(corner.x, b.min_x);
    const double x1 = std::min(corner.x + g.cell_size, b.max_x);
    const double y0 = std::max(corner.y, b.min_y);
    const double y1 = std::min(corner.y + g.cell_size, b.max_y);
    Vec2 p{x0 + uniform01(rng) * (x1 - x0), y0 + uniform01(rng) * (y1 - y0)};
    // Half-open cells: keep the point strictly inside the chosen cell.
    if (g.cell_of(p) != c) {
      p = g.center_of(c);
    }
    Viewpoint v;
    v.id = region.id * std::max(cfg.samples_per_region, 1) + i;
    v.region_id = region.id;
    v.position = p;
    out.push_back(v);
  }
  return out;
}

std::size_t score_coverage(Vec2 v, const OccupancyGrid& grid, const SensorModel& sensor) {
  return count_reveal(grid, Pose{v, 0.0}, sensor);
}

std::size_t score_semantic_density(Vec2 v, std::span<const SemanticPoint> points, double r,
                                   double min_valid_relevance) {
  const double r2 = r * r;
  std::size_t count = 0;
  for (const auto& p : points) {
    if (valid_semantic_point(p, min_valid_relevance) && squared_distance(p.position.planar(), v) <= r2) {
      ++count;
    }
  }
  return count;
}

void score_viewpoints(std::span<Viewpoint> viewpoints, const OccupancyGrid& grid,
                      std::span<const SemanticPoint> points, const SamplerConfig& cfg) {
  for (auto& v : viewpoints) {
    v.s_cov = static_cast<double>(score_coverage(v.position, grid, cfg.sensor));
    v.s_sem_density = cfg.lambda2 == 0.0
                          ? 0.0
                          : static_cast<double>(score_semantic_density(v.position, points, cfg.density_radius,
                                                                       cfg.min_valid_relevance));
    v.s_viewpoint = score_viewpoint(v.s_cov, v.s_sem_density, cfg.lambda1, cfg.lambda2);
  }
}

Route select_and_link(std::span<const Viewpoint> viewpoints, const OccupancyGrid& grid, Vec2 robot, int keep_k) {
  Route route;
  const GridGeometry& g = grid.geometry();
  const CellIndex robot_cell = g.cell_of(robot);
  if (!g.in_bounds(robot_cell) || keep_k < 1) {
    return route;
  }
  const DistanceField from_robot(grid, robot_cell, PathMode::KnownFreeOnly);

  std::vector<const Viewpoint*> candidates;
  for (const auto& v : viewpoints) {
    if (from_robot.reachable(g.cell_of(v.position))) {
      candidates.push_back(&v);
    }
  }
  std::sort(candidates.begin(), candidates.end(), [](const Viewpoint* a, const Viewpoint* b) {
    return a->s_viewpoint != b->s_viewpoint ? a->s_viewpoint > b->s_viewpoint : a->id < b->id;
  });
  if (candidates.size() > static_cast<std::size_t>(keep_k)) {
    candidates.resize(static_cast<std::size_t>(keep_k));
  }
  if (candidates.empty()) {
    return route;
  }
  std::sort(candidates.begin(), candidates.end(),
            [](const Viewpoint* a, const Viewpoint* b) { return a->id < b->id; });

  const std::size_t n = candidates.size();
  std::vector<DistanceField> fields;
  fields.reserve(n);
  for (const auto* v : candidates) {
    fields.emplace_back(grid, g.cell_of(v->position), PathMode::KnownFreeOnly);
  }
  auto leg = [&](std::size_t from, std::size_t to) {  // from == n means the robot
    const CellIndex dst = g.cell_of(candidates[to]->position);
    return from == n ? from_robot.cost(dst) : fields[from].cost(dst);
  };

  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> best_order = order;
  double best_cost = std::numeric_limits<double>::infinity();
  if (n <= 7) {
    // Permutations are enumerated in lexicographic id order, so the first
    // minimum found is the tie-break winner.
    do {
      double c = 0.0;
      std::size_t at = n;
      for (const std::size_t k : order) {
        c += leg(at, k);
        at = k;
      }
      if (c < best_cost - 1e-9) {
        best_cost = c;
        best_order = order;
      }
    } while (std::next_permutation(order.begin(), order.end()));
  } else {
    std::vector<bool> used(n, false);
    best_order.clear();
    best_cost = 0.0;
    std::size_t at = n;
    for (std::size_t step = 0; step < n; ++step) {
      std::size_t pick = n;
      double pick_cost = std::numeric_limits<double>::infinity();
      for (std::size_t k = 0; k < n; ++k) {
        if (!used[k] && leg(at, k) < pick_cost - 1e-9) {
          pick = k;
          pick_cost = leg(at, k);
        }
      }
      used[pick] = true;
      best_order.push_back(pick);
      best_cost += pick_cost;
      at = pick;
    }
  }

  std::size_t at = n;
  for (const std::size_t k : best_order) {
    const CellIndex dst = g.cell_of(candidates[k]->position);
    auto path = at == n ? from_robot.path_to(dst) : fields[at].path_to(dst);
    route.legs.push_back(std::move(*path));
    route.stops.push_back(*candidates[k]);
    at = k;
  }
  route.cost = best_cost;
  return route;
}

}  // namespace semnav
