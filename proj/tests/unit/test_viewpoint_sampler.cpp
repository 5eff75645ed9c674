#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "semnav/viewpoint_sampler.hpp"

using namespace semnav;

namespace {

std::shared_ptr<TruthMap> random_map(std::mt19937_64& rng, int w, int h, double density, double cell) {
  auto m = std::make_shared<TruthMap>(w, h, cell);
  std::bernoulli_distribution occ(density);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) m->set_occupied({x, y}, occ(rng));
  return m;
}

void observe_all(OccupancyGrid& g) {
  const auto& geo = g.geometry();
  for (std::size_t id = 0; id < geo.cell_count(); ++id) g.observe(geo.cell_at(id));
}

SemanticPoint pt(double x, double y, double rel, double z = 0.0, std::string label = "cup") {
  return {{x, y, z}, std::move(label), rel};
}

}  // namespace

TEST(SampleViewpoints, UnknownRegionIsEmpty) {
  auto m = std::make_shared<TruthMap>(20, 20, 0.5);
  OccupancyGrid g(m);
  const RegionLayout layout(m->geometry().bounds(), 5.0);
  EXPECT_TRUE(sample_viewpoints(layout.region(0), g, {}, 1).empty());
}

TEST(SampleViewpoints, DeterministicAndInsideKnownFreeCells) {
  std::mt19937_64 rng(3);
  auto m = random_map(rng, 30, 30, 0.2, 0.3);
  OccupancyGrid g(m);
  observe_all(g);
  const RegionLayout layout(m->geometry().bounds(), 4.0);
  SamplerConfig cfg;
  for (const auto& r : layout.regions()) {
    const auto a = sample_viewpoints(r, g, cfg, 11);
    const auto b = sample_viewpoints(r, g, cfg, 11);
    ASSERT_EQ(a.size(), b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
      EXPECT_EQ(a[i].position, b[i].position);
      EXPECT_EQ(a[i].region_id, r.id);
      EXPECT_TRUE(r.bounds.contains(a[i].position));
      EXPECT_TRUE(g.known_free(g.geometry().cell_of(a[i].position)));
    }
  }
}

TEST(SampleViewpoints, SingleFreeCellHoldsEverySample) {
  auto m = std::make_shared<TruthMap>(10, 10, 0.5);
  for (int y = 0; y < 10; ++y)
    for (int x = 0; x < 10; ++x) m->set_occupied({x, y}, !(x == 3 && y == 4));
  OccupancyGrid g(m);
  observe_all(g);
  const RegionLayout layout(m->geometry().bounds(), 5.0);
  SamplerConfig cfg;
  cfg.samples_per_region = 5;
  const auto v = sample_viewpoints(layout.region(0), g, cfg, 2);
  ASSERT_EQ(v.size(), 5u);
  for (const auto& p : v) EXPECT_EQ(g.geometry().cell_of(p.position), (CellIndex{3, 4}));
}

TEST(ScoreCoverage, FullyObservedWorldIsZero) {
  std::mt19937_64 rng(5);
  auto m = random_map(rng, 20, 20, 0.2, 0.5);
  OccupancyGrid g(m);
  observe_all(g);
  EXPECT_EQ(score_coverage({5.1, 5.1}, g, {}), 0u);
}

TEST(ScoreCoverage, PocketBehindWallIsZero) {
  // A sealed pocket at the right end; everything else is observed.
  auto m = std::make_shared<TruthMap>(20, 5, 0.5);
  for (int y = 0; y < 5; ++y) m->set_occupied({15, y}, true);
  OccupancyGrid g(m);
  for (int y = 0; y < 5; ++y)
    for (int x = 0; x <= 15; ++x) g.observe({x, y});
  EXPECT_EQ(score_coverage({2.0, 1.2}, g, {}), 0u);
}

TEST(ScoreCoverage, MatchesRevealOnACopyAndNeverMutates) {
  std::mt19937_64 rng(9);
  for (int trial = 0; trial < 60; ++trial) {
    auto m = random_map(rng, 25, 25, 0.25, 0.2);
    OccupancyGrid g(m);
    // Partially explored belief.
    std::uniform_real_distribution<double> u(0.2, 4.8);
    for (int k = 0; k < 3; ++k) reveal(g, Pose{u(rng), u(rng), u(rng)}, SensorModel{1.5, 2.0});
    const SensorModel sensor{1.0 + trial % 3, 2.0 * std::numbers::pi};
    const Vec2 v{u(rng), u(rng)};
    const auto before = g.fingerprint();
    const std::size_t got = score_coverage(v, g, sensor);
    EXPECT_EQ(g.fingerprint(), before);
    OccupancyGrid copy = g;
    EXPECT_EQ(got, reveal(copy, Pose{v, 0.0}, sensor).size());
  }
}

TEST(SemanticDensity, Examples) {
  EXPECT_EQ(score_semantic_density({0, 0}, {}, 2.0, 0.2), 0u);
  const std::vector<SemanticPoint> edge{pt(2.0, 0.0, 0.5)};
  EXPECT_EQ(score_semantic_density({0, 0}, edge, 2.0, 0.2), 1u);
  const std::vector<SemanticPoint> high{pt(0.0, 2.0, 0.5, 10.0)};
  EXPECT_EQ(score_semantic_density({0, 0}, high, 2.0, 0.2), 1u);
  const std::vector<SemanticPoint> weak{pt(0.5, 0.0, 0.1), pt(0.5, 0.0, 0.9, 0.0, "")};
  EXPECT_EQ(score_semantic_density({0, 0}, weak, 2.0, 0.2), 0u);
}

TEST(SemanticDensity, BruteForcePermutationAndMonotonicity) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> u(-3, 3), rel(0, 1);
  for (int trial = 0; trial < 200; ++trial) {
    std::vector<SemanticPoint> pts;
    for (int i = 0; i < 40; ++i) pts.push_back(pt(u(rng), u(rng), rel(rng), u(rng)));
    const Vec2 v{u(rng), u(rng)};
    std::size_t brute = 0;
    for (const auto& p : pts) {
      const double d = std::hypot(p.position.x - v.x, p.position.y - v.y);
      if (d <= 2.0 && p.relevance >= 0.2) ++brute;
    }
    const auto got = score_semantic_density(v, pts, 2.0, 0.2);
    EXPECT_EQ(got, brute);
    std::shuffle(pts.begin(), pts.end(), rng);
    EXPECT_EQ(score_semantic_density(v, pts, 2.0, 0.2), got);
    pts.push_back(pt(v.x + 0.5, v.y, 0.9));
    EXPECT_GE(score_semantic_density(v, pts, 2.0, 0.2), got);
  }
}

TEST(ScoreViewpoint, Examples) {
  EXPECT_DOUBLE_EQ(score_viewpoint(7, 0, 1, 0), 7.0);
  EXPECT_DOUBLE_EQ(score_viewpoint(0, 3, 0, 1), 3.0);
  EXPECT_DOUBLE_EQ(score_viewpoint(4, 3, 0.5, 2), 8.0);
}

TEST(ScoreViewpoints, Lambda2ZeroRankingIgnoresPoints) {
  std::mt19937_64 rng(4);
  auto m = random_map(rng, 30, 30, 0.15, 0.2);
  OccupancyGrid g(m);
  reveal(g, Pose{3.0, 3.0, 0.0}, SensorModel{2.5, 2 * std::numbers::pi});
  const RegionLayout layout(m->geometry().bounds(), 2.0);
  SamplerConfig cfg;
  cfg.lambda2 = 0.0;
  auto vps = sample_viewpoints(layout.region(layout.region_at({3.0, 3.0})), g, cfg, 8);
  ASSERT_FALSE(vps.empty());
  std::vector<SemanticPoint> a{pt(3, 3, 0.9), pt(2.5, 3.1, 0.6)}, b{pt(1, 1, 0.3)};
  auto va = vps, vb = vps;
  score_viewpoints(va, g, a, cfg);
  score_viewpoints(vb, g, b, cfg);
  for (std::size_t i = 0; i < vps.size(); ++i) EXPECT_EQ(va[i].s_viewpoint, vb[i].s_viewpoint);
}

namespace {

Viewpoint vp(int id, Vec2 p, double score) {
  Viewpoint v;
  v.id = id;
  v.position = p;
  v.s_viewpoint = score;
  return v;
}

}  // namespace

TEST(SelectAndLink, SingleBestAndTieOrder) {
  auto m = std::make_shared<TruthMap>(20, 20, 0.5);
  OccupancyGrid g(m);
  observe_all(g);
  const std::vector<Viewpoint> v{vp(0, {2.25, 5.25}, 1.0), vp(1, {8.25, 5.25}, 1.0), vp(2, {5.25, 9.25}, 3.0)};
  const auto one = select_and_link(v, g, {5.25, 5.25}, 1);
  ASSERT_EQ(one.stops.size(), 1u);
  EXPECT_EQ(one.stops[0].id, 2);
  // Viewpoints 0 and 1 are both 3 m from the robot.
  const std::vector<Viewpoint> pair{v[1], v[0]};
  const auto two = select_and_link(pair, g, {5.25, 5.25}, 2);
  ASSERT_EQ(two.stops.size(), 2u);
  EXPECT_EQ(two.stops[0].id, 0);
  EXPECT_NEAR(two.cost, 9.0, 1e-9);
}

TEST(SelectAndLink, UnreachableIsEmpty) {
  auto m = std::make_shared<TruthMap>(10, 10, 0.5);
  OccupancyGrid g(m);  // nothing known
  const std::vector<Viewpoint> v{vp(0, {2.25, 2.25}, 1.0)};
  EXPECT_TRUE(select_and_link(v, g, {1.25, 1.25}, 3).stops.empty());
}

TEST(SelectAndLink, OptimalAgainstPermutationOracleAndNoWorseThanIdOrder) {
  std::mt19937_64 rng(17);
  int checked = 0;
  for (int trial = 0; trial < 80; ++trial) {
    auto m = random_map(rng, 24, 24, 0.2, 0.25);
    OccupancyGrid g(m);
    observe_all(g);
    const auto& geo = g.geometry();
    std::vector<CellIndex> free;
    for (std::size_t id = 0; id < geo.cell_count(); ++id)
      if (m->free(geo.cell_at(id))) free.push_back(geo.cell_at(id));
    const CellIndex robot = free[rng() % free.size()];
    const auto from_robot = oracle::dijkstra(*m, {robot});
    std::vector<Viewpoint> vps;
    for (int i = 0; vps.size() < 6 && i < 200; ++i) {
      const CellIndex c = free[rng() % free.size()];
      if (std::isinf(from_robot[geo.id(c)])) continue;
      vps.push_back(vp(static_cast<int>(vps.size()), geo.center_of(c), static_cast<double>(rng() % 5)));
    }
    if (vps.size() < 2) continue;
    const auto route = select_and_link(vps, g, geo.center_of(robot), 6);
    ASSERT_EQ(route.stops.size(), vps.size());

    // Row k holds distances from viewpoint k; the last row is the robot.
    std::vector<std::vector<double>> from;
    for (const auto& v : vps) from.push_back(oracle::dijkstra(*m, {geo.cell_of(v.position)}));
    from.push_back(from_robot);
    auto cost_of = [&](const std::vector<int>& order) {
      double c = 0;
      std::size_t at = vps.size();
      for (const int k : order) {
        c += from[at][geo.id(geo.cell_of(vps[static_cast<std::size_t>(k)].position))];
        at = static_cast<std::size_t>(k);
      }
      return c;
    };
    std::vector<int> order(vps.size());
    std::iota(order.begin(), order.end(), 0);
    const double id_order = cost_of(order);
    double best = std::numeric_limits<double>::infinity();
    do best = std::min(best, cost_of(order));
    while (std::next_permutation(order.begin(), order.end()));

    EXPECT_NEAR(route.cost, best, 1e-9);
    EXPECT_LE(route.cost, id_order + 1e-9);
    double legs = 0;
    for (const auto& l : route.legs) legs += l.length;
    EXPECT_NEAR(legs, route.cost, 1e-9);
    ++checked;
  }
  EXPECT_GT(checked, 40);
}
