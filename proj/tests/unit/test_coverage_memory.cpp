#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "oracles.hpp"
#include "semnav/coverage_memory.hpp"

using namespace semnav;

namespace {

constexpr double kPi = std::numbers::pi;

SubRegion square(int id, double x0, double y0, double size) {
  const Rect b{x0, y0, x0 + size, y0 + size};
  return {id, b, b.center()};
}

CoverageConfig omni(int n = 16) {
  CoverageConfig c;
  c.bitmap_n = n;
  c.fov.radius = 100.0;
  c.fov.angle = 2.0 * kPi;
  return c;
}

}  // namespace

TEST(EstimateHeading, Examples) {
  EXPECT_DOUBLE_EQ(estimate_heading({0, 0}, {1, 0}, 2.0, 0.05), 0.0);
  EXPECT_DOUBLE_EQ(estimate_heading({0, 0}, {0, 1}, 0.0, 0.05), kPi / 2);
  EXPECT_DOUBLE_EQ(estimate_heading({3, 3}, {3, 3}, 1.25, 0.05), 1.25);
  EXPECT_DOUBLE_EQ(estimate_heading({0, 0}, {0.04, 0}, -0.5, 0.05), -0.5);
  EXPECT_DOUBLE_EQ(estimate_heading({0, 0}, {0.05, 0}, -0.5, 0.05), 0.0);
}

TEST(Visible, BoundaryCases) {
  FovModel f;
  EXPECT_TRUE(visible({f.radius, 0}, {0, 0}, 0.0, f));
  EXPECT_FALSE(visible({f.radius + 1e-9, 0}, {0, 0}, 0.0, f));
  const double edge = f.angle / 2;
  EXPECT_TRUE(visible({std::cos(edge - 1e-9), std::sin(edge - 1e-9)}, {0, 0}, 0.0, f));
  EXPECT_FALSE(visible({std::cos(edge + 1e-6), std::sin(edge + 1e-6)}, {0, 0}, 0.0, f));
  // Wrapping across +-pi.
  EXPECT_TRUE(visible({-1, 0.01}, {0, 0}, -kPi + 0.05, f));
}

TEST(Visible, AgreesWithPolarOracle) {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-6, 6), h(-kPi, kPi), a(0.1, 2 * kPi), r(0.5, 5);
  for (int i = 0; i < 20000; ++i) {
    FovModel f;
    f.radius = r(rng);
    f.angle = a(rng);
    const Vec2 g{u(rng), u(rng)}, p{u(rng), u(rng)};
    const double head = h(rng);
    EXPECT_EQ(visible(g, p, head, f), oracle::visible_polar(g, p, head, f.radius, f.angle))
        << g.x << "," << g.y << " from " << p.x << "," << p.y << " h=" << head;
  }
}

TEST(RegionMemory, CoverageRatioExamples) {
  RegionMemory m(10);
  EXPECT_EQ(coverage_ratio(m), 0.0);
  for (int k = 0; k < 25; ++k) EXPECT_TRUE(m.mark(k % 10, k / 10));
  EXPECT_FALSE(m.mark(0, 0));
  EXPECT_DOUBLE_EQ(coverage_ratio(m), 0.25);
  for (int j = 0; j < 10; ++j)
    for (int i = 0; i < 10; ++i) m.mark(i, j);
  EXPECT_EQ(coverage_ratio(m), 1.0);
  m.reset();
  EXPECT_EQ(m.seen_count(), 0u);
}

TEST(Accumulate, FullSectorSeesEverythingAndRepeatAddsNothing) {
  CoverageMemory mem({square(0, 0, 0, 4)}, omni());
  EXPECT_EQ(mem.accumulate(0, {2, 2}, 0.0), 256u);
  EXPECT_EQ(mem.coverage(0), 1.0);
  EXPECT_EQ(mem.accumulate(0, {2, 2}, 0.0), 0u);
  EXPECT_EQ(mem.state(0), RegionState::Inactive);
}

TEST(Accumulate, NarrowSectorMatchesPerCellOracle) {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 4), h(-kPi, kPi);
  for (int trial = 0; trial < 200; ++trial) {
    CoverageConfig c;
    c.fov.angle = kPi / 2;
    c.fov.radius = 2.5;
    const auto reg = square(0, 0, 0, 4);
    CoverageMemory mem({reg}, c);
    const Vec2 p{u(rng), u(rng)};
    const double head = h(rng);
    const auto flips = mem.accumulate(0, p, head);
    std::size_t expect = 0;
    for (int j = 0; j < 16; ++j)
      for (int i = 0; i < 16; ++i) {
        const bool vis = oracle::visible_polar(bitmap_cell_center(reg, 16, i, j), p, head, 2.5, kPi / 2);
        EXPECT_EQ(mem.memory(0).seen(i, j), vis);
        expect += vis ? 1 : 0;
      }
    EXPECT_EQ(flips, expect);
    EXPECT_EQ(mem.memory(0).seen_count(), expect);
  }
}

TEST(Accumulate, CoverageNonDecreasingAndOnlyTouchesItsRegion) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0, 4), h(-kPi, kPi);
  CoverageMemory mem({square(0, 0, 0, 4), square(1, 4, 0, 4)}, CoverageConfig{});
  double prev = 0;
  for (int k = 0; k < 300; ++k) {
    mem.accumulate(0, {u(rng), u(rng)}, h(rng));
    EXPECT_GE(mem.coverage(0), prev);
    prev = mem.coverage(0);
    EXPECT_EQ(mem.coverage(1), 0.0);
    EXPECT_EQ(mem.state(0), RegionState::Inactive);
  }
}

TEST(RegionTransition, WorthlessAboveTau) {
  // With N=10, 85 marked cells means cov 0.85.
  CoverageConfig c;
  c.bitmap_n = 10;
  c.fov.radius = 0.01;  // keeps the entry accumulation tiny
  CoverageMemory mem({square(0, 0, 0, 4), square(1, 4, 0, 4)}, c);
  mem.on_region_transition(-1, 0, {100, 100}, 0.0);
  EXPECT_EQ(mem.state(0), RegionState::Active);
  auto& bits = const_cast<RegionMemory&>(mem.memory(0));
  for (int k = 0; k < 85; ++k) bits.mark(k % 10, k / 10);
  const auto ch = mem.on_region_transition(0, 1, {100, 100}, 0.0);
  EXPECT_EQ(mem.state(0), RegionState::Worthless);
  EXPECT_EQ(mem.state(1), RegionState::Active);
  ASSERT_EQ(ch.size(), 2u);
  EXPECT_EQ(ch[0].to, RegionState::Worthless);
}

TEST(RegionTransition, BelowTauStaysAndReentryResets) {
  CoverageConfig c;
  c.bitmap_n = 10;
  c.fov.radius = 0.01;
  CoverageMemory mem({square(0, 0, 0, 4), square(1, 4, 0, 4)}, c);
  mem.on_region_transition(-1, 0, {100, 100}, 0.0);
  auto& bits = const_cast<RegionMemory&>(mem.memory(0));
  for (int k = 0; k < 50; ++k) bits.mark(k % 10, k / 10);
  mem.on_region_transition(0, 1, {100, 100}, 0.0);
  EXPECT_EQ(mem.state(0), RegionState::Active);
  EXPECT_EQ(mem.memory(0).seen_count(), 50u);  // leaving never resets
  mem.on_region_transition(1, 0, {100, 100}, 0.0);
  EXPECT_EQ(mem.memory(0).seen_count(), 0u);
  EXPECT_TRUE(mem.on_region_transition(0, 0, {1, 1}, 0.0).empty());
}

TEST(RegionTransition, EntryAccumulatesFromPose) {
  CoverageMemory mem({square(0, 0, 0, 4), square(1, 4, 0, 4)}, omni());
  mem.on_region_transition(-1, 1, {6, 2}, 0.0);
  EXPECT_EQ(mem.coverage(1), 1.0);
  EXPECT_EQ(mem.coverage(0), 0.0);
}

TEST(RegionTransition, WorthlessIsAbsorbingUnderRandomWalks) {
  std::mt19937_64 rng(13);
  std::uniform_real_distribution<double> h(-kPi, kPi);
  std::vector<SubRegion> regs;
  for (int j = 0; j < 3; ++j)
    for (int i = 0; i < 3; ++i) regs.push_back(square(j * 3 + i, i * 4.0, j * 4.0, 4.0));
  for (int ep = 0; ep < 100; ++ep) {
    CoverageMemory mem(regs, CoverageConfig{});
    std::vector<bool> dead(9, false);
    Vec2 p{6, 6};
    int cur = 4;
    double head = 0;
    mem.on_region_transition(-1, cur, p, head);
    for (int step = 0; step < 400; ++step) {
      const Vec2 prev = p;
      const double a = h(rng);
      p = {std::clamp(p.x + 0.4 * std::cos(a), 0.01, 11.99), std::clamp(p.y + 0.4 * std::sin(a), 0.01, 11.99)};
      head = estimate_heading(prev, p, head, 0.05);
      const int next = static_cast<int>(p.y / 4) * 3 + static_cast<int>(p.x / 4);
      if (next != cur) {
        const auto before = mem.memory(cur).seen_count();
        mem.on_region_transition(cur, next, p, head);
        // Only the entered bitmap may be reset.
        EXPECT_EQ(mem.memory(cur).seen_count(), before);
        cur = next;
      } else {
        mem.accumulate(cur, p, head);
      }
      for (int r = 0; r < 9; ++r) {
        if (dead[static_cast<std::size_t>(r)]) EXPECT_EQ(mem.state(r), RegionState::Worthless);
        dead[static_cast<std::size_t>(r)] = mem.state(r) == RegionState::Worthless;
      }
    }
  }
}

TEST(CoverageConfig, Validation) {
  CoverageConfig c;
  c.tau = 1.5;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.fov.angle = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.fov.radius = -1;
  EXPECT_THROW(c.validate(), std::invalid_argument);
  c = {};
  c.bitmap_n = 0;
  EXPECT_THROW(c.validate(), std::invalid_argument);
}
