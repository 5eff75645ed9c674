#include <gtest/gtest.h>

#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <json.hpp>
#include <map>
#include <sstream>

#include "cli.hpp"
#include "semnav/render.hpp"

using namespace semnav;
namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

class CliTest : public ::testing::Test {
 protected:
  void SetUp() override {
    const auto* info = ::testing::UnitTest::GetInstance()->current_test_info();
    dir_ = fs::temp_directory_path() / (std::string("semnav_cli_") + info->name());
    fs::remove_all(dir_);
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  // Three generated scenarios under dir_/scenes.
  fs::path generate(int count = 3, int seeds = 2) {
    cli::GenOptions g;
    g.out_dir = dir_ / "scenes";
    g.count = count;
    g.seeds = seeds;
    std::ostringstream out, err;
    EXPECT_EQ(cli::cmd_gen_scenarios(g, out, err), cli::kExitOk) << err.str();
    return g.out_dir;
  }

  fs::path dir_;
};

}  // namespace

TEST_F(CliTest, RunWritesArtifactsAndIsDeterministic) {
  const auto scenes = generate(1, 1);
  cli::RunOptions r;
  r.scenario = scenes / "scene_000.json";
  std::string traces[2];
  for (int k = 0; k < 2; ++k) {
    r.out_dir = dir_ / ("run" + std::to_string(k));
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run(r, out, err), cli::kExitOk) << err.str();
    for (const char* f : {"trace.jsonl", "result.json", "render.ppm"}) EXPECT_TRUE(fs::exists(r.out_dir / f)) << f;
    traces[k] = slurp(r.out_dir / "trace.jsonl");
  }
  EXPECT_FALSE(traces[0].empty());
  EXPECT_EQ(traces[0], traces[1]);
}

TEST_F(CliTest, MissingMapIsInputErrorNamingThePath) {
  const auto scenes = generate(1, 1);
  fs::remove(scenes / "scene_000.map");
  cli::RunOptions r;
  r.scenario = scenes / "scene_000.json";
  r.out_dir = dir_ / "run";
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run(r, out, err), cli::kExitInput);
  EXPECT_NE(err.str().find("scene_000.map"), std::string::npos) << err.str();
}

TEST_F(CliTest, BadConfigIsConfigError) {
  const auto scenes = generate(1, 1);
  std::ofstream(dir_ / "bad.json") << "{\"version\": 1, \"nope\": 2}";
  cli::RunOptions r;
  r.scenario = scenes / "scene_000.json";
  r.config = dir_ / "bad.json";
  r.out_dir = dir_ / "run";
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_run(r, out, err), cli::kExitConfig);
}

TEST_F(CliTest, BatchGridRowsAndMetricsRecompute) {
  const auto scenes = generate(3, 2);
  json m;
  m["schema_version"] = 1;
  m["scenarios"] = {"scene_000.json", "scene_001.json", "scene_002.json"};
  m["policies"] = {"full", "nearest_frontier"};
  m["seeds"] = {0, 1};
  std::ofstream(scenes / "grid.json") << m.dump();
  cli::BatchOptions b;
  b.manifest = scenes / "grid.json";
  b.out_dir = dir_ / "batch";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_batch(b, out, err), cli::kExitOk) << err.str();

  std::istringstream rows(slurp(b.out_dir / "episodes.csv"));
  std::string line;
  std::getline(rows, line);
  int n = 0;
  while (std::getline(rows, line)) ++n;
  EXPECT_EQ(n, 12);

  std::map<std::string, std::vector<EpisodeResult>> by_policy;
  int files = 0;
  // Name order is the batch's own scenario-then-seed order, so sums match bitwise.
  std::vector<fs::path> paths;
  for (const auto& e : fs::directory_iterator(b.out_dir / "episodes")) paths.push_back(e.path());
  std::sort(paths.begin(), paths.end());
  for (const auto& path : paths) {
    const auto text = slurp(path);
    by_policy[json::parse(text)["policy"].get<std::string>()].push_back(cli::parse_result_json(text));
    ++files;
  }
  EXPECT_EQ(files, 12);

  std::istringstream metrics(slurp(b.out_dir / "metrics.csv"));
  std::getline(metrics, line);
  int checked = 0;
  while (std::getline(metrics, line)) {
    std::istringstream cells(line);
    std::string policy, episodes, errors, sr, spl;
    std::getline(cells, policy, ',');
    std::getline(cells, episodes, ',');
    std::getline(cells, errors, ',');
    std::getline(cells, sr, ',');
    std::getline(cells, spl, ',');
    const auto expect = compute_metrics(by_policy.at(policy));
    EXPECT_EQ(std::stod(sr), expect.sr) << policy;
    EXPECT_EQ(std::stod(spl), expect.spl) << policy;
    ++checked;
  }
  EXPECT_EQ(checked, 2);
}

TEST_F(CliTest, EmptyOrMissingManifest) {
  std::ofstream(dir_ / "empty.json") << R"({"schema_version": 1, "scenarios": [], "policies": ["full"], "seeds": [0]})";
  cli::BatchOptions b;
  b.manifest = dir_ / "empty.json";
  b.out_dir = dir_ / "out";
  std::ostringstream out, err;
  EXPECT_EQ(cli::cmd_batch(b, out, err), cli::kExitInput);
  EXPECT_NE(err.str().find("empty"), std::string::npos);
  b.manifest = dir_ / "missing.json";
  EXPECT_EQ(cli::cmd_batch(b, out, err), cli::kExitInput);
}

TEST_F(CliTest, RenderFramesAndRange) {
  const auto scenes = generate(1, 1);
  cli::RunOptions r;
  r.scenario = scenes / "scene_000.json";
  r.out_dir = dir_ / "run";
  std::ostringstream out, err;
  ASSERT_EQ(cli::cmd_run(r, out, err), cli::kExitOk) << err.str();
  const auto trace = r.out_dir / "trace.jsonl";
  const auto replay = TraceReplay::load(trace);

  const auto first = replay.state_at(0);
  EXPECT_EQ(first.route.size(), 1u);

  cli::RenderCmdOptions opt;
  opt.trace = trace;
  opt.frame = 0;
  opt.out_image = dir_ / "a.ppm";
  ASSERT_EQ(cli::cmd_render(opt, out, err), cli::kExitOk) << err.str();
  opt.out_image = dir_ / "b.ppm";
  ASSERT_EQ(cli::cmd_render(opt, out, err), cli::kExitOk);
  EXPECT_EQ(slurp(dir_ / "a.ppm"), slurp(dir_ / "b.ppm"));
  EXPECT_EQ(slurp(dir_ / "a.ppm").substr(0, 2), "P6");

  opt.frame = replay.frame_count();
  std::ostringstream err2;
  EXPECT_EQ(cli::cmd_render(opt, out, err2), cli::kExitInput);
  EXPECT_NE(err2.str().find(std::to_string(replay.frame_count() - 1)), std::string::npos) << err2.str();
}

TEST_F(CliTest, SuccessRouteEndsInsideTheSuccessCircle) {
  const auto scenes = generate(3, 1);
  int successes = 0;
  for (int i = 0; i < 3; ++i) {
    cli::RunOptions r;
    r.scenario = scenes / ("scene_00" + std::to_string(i) + ".json");
    r.out_dir = dir_ / ("run" + std::to_string(i));
    std::ostringstream out, err;
    ASSERT_EQ(cli::cmd_run(r, out, err), cli::kExitOk) << err.str();
    const auto res = json::parse(slurp(r.out_dir / "result.json"));
    if (!res["success"].get<bool>()) continue;
    ++successes;
    const auto replay = TraceReplay::load(r.out_dir / "trace.jsonl");
    const auto last = replay.state_at(replay.frame_count() - 1);
    const Vec2 end = last.route.back();
    Vec2 nearest{};
    double best = 1e9;
    for (const auto& t : replay.target_positions()) {
      if (distance(end, t) < best) best = distance(end, t), nearest = t;
    }
    EXPECT_LE(best, replay.success_distance() + 1e-9);
    // The same check in image space: pixel distance, at pixels_per_cell / cell_size
    // pixels per meter, within the success radius plus one pixel diagonal.
    const auto& g = replay.map().geometry();
    const Pixel a = to_pixel(g, end), b = to_pixel(g, nearest);
    const double ppm = 4.0 / g.cell_size;
    EXPECT_LE(std::hypot(a.x - b.x, a.y - b.y), replay.success_distance() * ppm + std::sqrt(2.0));
  }
  EXPECT_GT(successes, 0);
}

TEST_F(CliTest, RealBinary) {
  const std::string bin = SEMNAV_CLI_PATH;
  auto sh = [](const std::string& cmd) {
    const int status = std::system((cmd + " >/dev/null 2>&1").c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  };
  const auto scenes = dir_ / "scenes";
  EXPECT_EQ(sh(bin + " gen-scenarios -o " + scenes.string() + " -n 1 --seeds 1"), 0);
  EXPECT_EQ(sh(bin + " run " + (scenes / "scene_000.json").string() + " -o " + (dir_ / "run").string() +
               " -p geometric_only"),
            0);
  EXPECT_TRUE(fs::exists(dir_ / "run" / "render.ppm"));
  EXPECT_EQ(sh(bin + " run " + (dir_ / "nope.json").string() + " -o " + (dir_ / "x").string()), 2);
  EXPECT_NE(sh(bin + " fly"), 0);
}
