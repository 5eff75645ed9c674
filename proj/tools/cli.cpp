#include "cli.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "semnav/config.hpp"
#include "semnav/render.hpp"

namespace semnav::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open '" + p.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write '" + p.string() + "'");
  out << text;
}

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

RunConfig load_config_or_default(const std::optional<fs::path>& path) {
  return path ? load_run_config(*path) : RunConfig{};
}

}  // namespace

std::string result_json(const EpisodeResult& r, const std::string& scenario, PolicyKind policy, std::uint64_t seed) {
  json j;
  j["schema_version"] = 1;
  j["scenario"] = scenario;
  j["policy"] = to_string(policy);
  j["seed"] = seed;
  j["target"] = r.target;
  j["success"] = r.success;
  j["path_length"] = r.path_length;
  j["oracle_shortest"] = r.oracle_shortest;
  j["oracle_reachable"] = r.oracle_reachable;
  j["steps"] = r.steps;
  j["termination"] = to_string(r.termination);
  j["target_detected"] = r.target_detected;
  j["planning_cycles"] = r.planning_cycles;
  j["degradation_events"] = r.degradation_events;
  j["start"] = {r.start.x, r.start.y, r.start.heading};
  j["spl_term"] = spl_term(r);
  return j.dump(2) + "\n";
}

EpisodeResult parse_result_json(const std::string& text) {
  const json j = json::parse(text);
  EpisodeResult r;
  r.target = j.at("target").get<std::string>();
  r.success = j.at("success").get<bool>();
  r.path_length = j.at("path_length").get<double>();
  r.oracle_shortest = j.at("oracle_shortest").get<double>();
  r.oracle_reachable = j.value("oracle_reachable", false);
  r.steps = j.at("steps").get<int>();
  r.termination = termination_from_string(j.at("termination").get<std::string>()).value_or(Termination::NoPlan);
  r.target_detected = j.value("target_detected", false);
  r.planning_cycles = j.value("planning_cycles", 0);
  return r;
}

int cmd_run(const RunOptions& opts, std::ostream& out, std::ostream& err) {
  RunConfig cfg;
  try {
    cfg = load_config_or_default(opts.config);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  Scenario scenario;
  try {
    scenario = load_scenario(opts.scenario);
  } catch (const MapFormatError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const ScenarioError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  }
  if (opts.seed) scenario.seed = *opts.seed;

  try {
    fs::create_directories(opts.out_dir);
    const fs::path trace_path = opts.out_dir / "trace.jsonl";
    EpisodeResult result;
    {
      std::ofstream trace(trace_path, std::ios::binary);
      if (!trace) throw std::runtime_error("cannot write '" + trace_path.string() + "'");
      EpisodeOptions eo;
      eo.trace = &trace;
      result = run_episode(scenario, opts.policy, cfg, eo);
    }
    write_file(opts.out_dir / "result.json", result_json(result, scenario.name, opts.policy, scenario.seed));
    const TraceReplay replay = TraceReplay::load(trace_path);
    std::ofstream img(opts.out_dir / "render.ppm", std::ios::binary);
    render_frame(replay, replay.frame_count() - 1).write_ppm(img);
    out << scenario.name << ": " << (result.success ? "success" : "failure") << " (" << to_string(result.termination)
        << ") steps=" << result.steps << " p=" << num(result.path_length) << " l=" << num(result.oracle_shortest)
        << '\n';
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

int cmd_batch(const BatchOptions& opts, std::ostream& out, std::ostream& err) {
  json manifest;
  try {
    manifest = json::parse(read_file(opts.manifest));
  } catch (const std::exception& e) {
    err << "error: manifest " << opts.manifest.string() << ": " << e.what() << '\n';
    return kExitInput;
  }
  const fs::path base = opts.manifest.parent_path();
  std::vector<std::string> scenario_paths;
  std::vector<PolicyKind> policies;
  std::vector<std::uint64_t> seeds;
  RunConfig cfg;
  int jobs = 1;
  try {
    for (const auto& [key, value] : manifest.items()) {
      static const std::vector<std::string> allowed = {"schema_version", "scenarios", "policies", "seeds", "config", "jobs"};
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        throw std::runtime_error("unknown manifest key '" + key + "'");
      }
    }
    if (manifest.value("schema_version", 0) != 1) throw std::runtime_error("manifest schema_version must be 1");
    for (const auto& s : manifest.value("scenarios", json::array())) scenario_paths.push_back(s.get<std::string>());
    for (const auto& p : manifest.value("policies", json::array())) {
      const auto kind = policy_from_string(p.get<std::string>());
      if (!kind) throw std::runtime_error("unknown policy '" + p.get<std::string>() + "'");
      policies.push_back(*kind);
    }
    for (const auto& s : manifest.value("seeds", json::array())) seeds.push_back(s.get<std::uint64_t>());
    jobs = opts.jobs.value_or(manifest.value("jobs", 1));
  } catch (const std::exception& e) {
    err << "error: manifest " << opts.manifest.string() << ": " << e.what() << '\n';
    return kExitInput;
  }
  if (scenario_paths.empty() || policies.empty() || seeds.empty()) {
    err << "error: manifest " << opts.manifest.string() << " is empty (needs scenarios, policies and seeds)\n";
    return kExitInput;
  }
  try {
    if (manifest.contains("config")) cfg = load_run_config(base / manifest["config"].get<std::string>());
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }

  struct Task {
    std::size_t scenario;
    PolicyKind policy;
    std::uint64_t seed;
    std::string name;
    std::optional<EpisodeResult> result;
    std::string error;
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < scenario_paths.size(); ++s)
    for (const auto p : policies)
      for (const auto seed : seeds) tasks.push_back({s, p, seed, fs::path(scenario_paths[s]).stem().string(), {}, {}});

  const fs::path episodes_dir = opts.out_dir / "episodes";
  try {
    fs::create_directories(episodes_dir);
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }

  // Scenarios are parsed once; a load failure marks every row using it.
  std::vector<std::optional<Scenario>> scenarios(scenario_paths.size());
  std::vector<std::string> load_errors(scenario_paths.size());
  for (std::size_t s = 0; s < scenario_paths.size(); ++s) {
    try {
      scenarios[s] = load_scenario(base / scenario_paths[s]);
    } catch (const std::exception& e) {
      load_errors[s] = e.what();
    }
  }

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < tasks.size(); i = next++) {
      Task& t = tasks[i];
      if (!scenarios[t.scenario]) {
        t.error = load_errors[t.scenario];
        continue;
      }
      try {
        Scenario sc = *scenarios[t.scenario];
        sc.seed = t.seed;
        t.name = sc.name;
        t.result = run_episode(sc, t.policy, cfg);
        write_file(episodes_dir / (t.name + "__" + std::string(to_string(t.policy)) + "__" + std::to_string(t.seed) + ".json"),
                   result_json(*t.result, t.name, t.policy, t.seed));
      } catch (const std::exception& e) {
        t.result.reset();
        t.error = e.what();
      }
    }
  };
  const int n_threads = std::max(1, std::min<int>(jobs, static_cast<int>(tasks.size())));
  if (n_threads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int k = 0; k < n_threads; ++k) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  std::ostringstream rows;
  rows << "scenario,policy,seed,status,success,path_length,oracle_shortest,steps,termination,spl_term,error\n";
  std::map<PolicyKind, std::vector<EpisodeResult>> by_policy;
  std::map<PolicyKind, int> errors;
  for (const auto& t : tasks) {
    rows << csv_escape(t.name) << ',' << to_string(t.policy) << ',' << t.seed << ',';
    if (t.result) {
      const auto& r = *t.result;
      rows << "ok," << (r.success ? 1 : 0) << ',' << num(r.path_length) << ',' << num(r.oracle_shortest) << ','
           << r.steps << ',' << to_string(r.termination) << ',' << num(spl_term(r)) << ",\n";
      by_policy[t.policy].push_back(r);
    } else {
      rows << "error,,,,,,," << csv_escape(t.error) << '\n';
      ++errors[t.policy];
    }
  }

  std::ostringstream metrics;
  metrics << "policy,episodes,errors,sr,spl\n";
  std::map<PolicyKind, Metrics> summary;
  for (const auto p : policies) {
    if (summary.count(p)) continue;  // listed twice in the manifest
    metrics << to_string(p) << ',' << by_policy[p].size() << ',' << errors[p] << ',';
    if (by_policy[p].empty()) {
      metrics << ",\n";
      summary[p] = Metrics{};
      continue;
    }
    const Metrics m = compute_metrics(by_policy[p]);
    summary[p] = m;
    metrics << num(m.sr) << ',' << num(m.spl) << '\n';
  }

  std::ostringstream text;
  std::size_t failed = 0;
  for (const auto& [p, n] : errors) failed += static_cast<std::size_t>(n);
  text << "episodes: " << tasks.size() << " (" << tasks.size() - failed << " ok)\n";
  for (const auto& [p, m] : summary) {
    text << std::left << std::setw(18) << to_string(p) << " SR " << std::fixed << std::setprecision(4) << m.sr
         << "  SPL " << m.spl << "  (n=" << m.episodes << ")\n";
  }
  if (summary.count(PolicyKind::Full)) {
    const Metrics& f = summary[PolicyKind::Full];
    for (const auto& [p, m] : summary) {
      if (p == PolicyKind::Full) continue;
      text << "full vs " << to_string(p) << ": dSR " << std::showpos << f.sr - m.sr << std::noshowpos << "  SPL ratio ";
      if (m.spl > 0.0) text << f.spl / m.spl; else text << "n/a";
      text << '\n';
    }
  }
  try {
    write_file(opts.out_dir / "episodes.csv", rows.str());
    write_file(opts.out_dir / "metrics.csv", metrics.str());
    write_file(opts.out_dir / "summary.txt", text.str());
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  out << text.str();
  for (const auto& t : tasks) {
    if (!t.result) err << "episode " << t.name << '/' << to_string(t.policy) << '/' << t.seed << " failed: " << t.error << '\n';
  }
  bool any_ok = false;
  for (const auto& t : tasks) any_ok = any_ok || t.result.has_value();
  return any_ok ? kExitOk : kExitFailure;
}

int cmd_render(const RenderCmdOptions& opts, std::ostream& out, std::ostream& err) {
  try {
    const TraceReplay replay = TraceReplay::load(opts.trace);
    const int frame = opts.frame.value_or(replay.frame_count() - 1);
    const Image img = render_frame(replay, frame, {opts.pixels_per_cell});
    std::ofstream file(opts.out_image, std::ios::binary);
    if (!file) throw std::runtime_error("cannot write '" + opts.out_image.string() + "'");
    img.write_ppm(file);
    out << "wrote " << opts.out_image.string() << " (frame " << frame << ", " << img.width() << "x" << img.height()
        << ")\n";
  } catch (const TraceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

GeneratorConfig parse_generator_config(const std::string& text) {
  const json j = json::parse(text);
  GeneratorConfig g;
  for (const auto& [key, v] : j.items()) {
    if (key == "rooms_per_side") g.rooms_per_side = v.get<int>();
    else if (key == "room_width") g.room_width = v.get<double>();
    else if (key == "room_depth") g.room_depth = v.get<double>();
    else if (key == "corridor_width") g.corridor_width = v.get<double>();
    else if (key == "door_width") g.door_width = v.get<double>();
    else if (key == "cell_size") g.cell_size = v.get<double>();
    else if (key == "objects_min") g.objects_min = v.get<int>();
    else if (key == "objects_max") g.objects_max = v.get<int>();
    else if (key == "object_spacing") g.object_spacing = v.get<double>();
    else if (key == "max_steps") g.max_steps = v.get<int>();
    else if (key == "success_distance") g.success_distance = v.get<double>();
    else if (key == "randomize_start") g.randomize_start = v.get<bool>();
    else if (key == "coherent_layout") g.coherent_layout = v.get<bool>();
    else if (key == "kits") g.kits = v.get<std::vector<std::string>>();
    else throw std::runtime_error("unknown generator key '" + key + "'");
  }
  return g;
}

int cmd_gen_scenarios(const GenOptions& opts, std::ostream& out, std::ostream& err) {
  GeneratorConfig gen;
  try {
    if (opts.generator_config) gen = parse_generator_config(read_file(*opts.generator_config));
  } catch (const std::exception& e) {
    err << "error: generator config: " << e.what() << '\n';
    return kExitConfig;
  }
  if (opts.count < 1 || opts.seeds < 1) {
    err << "error: --count and --seeds must be positive\n";
    return kExitConfig;
  }
  try {
    fs::create_directories(opts.out_dir);
    json manifest;
    manifest["schema_version"] = 1;
    manifest["scenarios"] = json::array();
    for (int i = 0; i < opts.count; ++i) {
      char name[32];
      std::snprintf(name, sizeof name, "scene_%03d", i);
      const Scenario s = generate_scenario(gen, mix_seed(opts.seed, static_cast<std::uint64_t>(i)), name);
      save_scenario(s, opts.out_dir / (std::string(name) + ".json"), std::string(name) + ".map");
      manifest["scenarios"].push_back(std::string(name) + ".json");
    }
    manifest["policies"] = json::array();
    for (const auto p : baseline_policies()) manifest["policies"].push_back(to_string(p));
    manifest["seeds"] = json::array();
    for (int k = 0; k < opts.seeds; ++k) manifest["seeds"].push_back(k);
    if (opts.run_config) manifest["config"] = *opts.run_config;
    write_file(opts.out_dir / "manifest.json", manifest.dump(2) + "\n");
    out << "wrote " << opts.count << " scenarios and manifest.json to " << opts.out_dir.string() << '\n';
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitOk;
}

}  // namespace semnav::cli
