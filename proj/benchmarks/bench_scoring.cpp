#include <benchmark/benchmark.h>

#include <random>

#include "semnav/occupancy_grid.hpp"
#include "semnav/planner.hpp"
#include "semnav/region_evaluator.hpp"
#include "semnav/scenario_gen.hpp"
#include "semnav/simulator.hpp"
#include "semnav/viewpoint_sampler.hpp"

using namespace semnav;

namespace {

std::vector<SemanticPoint> random_points(std::size_t n, double extent) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0, extent), rel(0, 1);
  std::vector<SemanticPoint> pts;
  for (std::size_t i = 0; i < n; ++i) pts.push_back({{u(rng), u(rng), 0.5}, "obj", rel(rng)});
  return pts;
}

}  // namespace

static void BM_ViewpointSemanticScore(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 20.0);
  for (auto _ : state) benchmark::DoNotOptimize(viewpoint_semantic_score({10, 10}, pts, 2.0));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_ViewpointSemanticScore)->Arg(64)->Arg(512)->Arg(4096);

static void BM_RegionScore(benchmark::State& state) {
  const auto pts = random_points(static_cast<std::size_t>(state.range(0)), 4.0);
  const SubRegion region{0, {0, 0, 4, 4}, {2, 2}};
  std::vector<Viewpoint> vps(10);
  for (int i = 0; i < 10; ++i) {
    vps[static_cast<std::size_t>(i)].id = i;
    vps[static_cast<std::size_t>(i)].region_id = 0;
    vps[static_cast<std::size_t>(i)].position = {0.4 * i, 0.3 * i};
    vps[static_cast<std::size_t>(i)].s_viewpoint = i;
  }
  const EvaluatorConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(region_score(region, vps, pts, cfg));
}
BENCHMARK(BM_RegionScore)->Arg(50)->Arg(500);

static void BM_ScoreCoverage(benchmark::State& state) {
  const auto s = generate_scenario(GeneratorConfig{}, 1, "bench");
  OccupancyGrid grid(s.map);
  const Vec2 c = s.map->geometry().bounds().center();
  reveal(grid, Pose(c, 0.0), SensorModel{4.0, 1.5});
  const SensorModel omni{4.0, 2.0 * std::numbers::pi};
  for (auto _ : state) benchmark::DoNotOptimize(score_coverage(c, grid, omni));
}
BENCHMARK(BM_ScoreCoverage);

static void BM_EpisodeFull(benchmark::State& state) {
  auto s = generate_scenario(GeneratorConfig{}, mix_seed(1, 0), "bench");
  const RunConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(run_episode(s, PolicyKind::Full, cfg));
}
BENCHMARK(BM_EpisodeFull)->Unit(benchmark::kMillisecond);
BENCHMARK_MAIN();
