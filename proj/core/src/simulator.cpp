#include "semnav/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace semnav {

using nlohmann::json;

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

char state_char(RegionState s) {
  switch (s) {
    case RegionState::Inactive: return 'I';
    case RegionState::Active: return 'A';
    case RegionState::Worthless: return 'W';
  }
  return '?';
}

std::string bitmap_hex(const RegionMemory& m) {
  static constexpr char kHex[] = "0123456789abcdef";
  const auto bits = m.bits();
  std::string out;
  out.reserve(bits.size() / 4 + 1);
  for (std::size_t i = 0; i < bits.size(); i += 4) {
    int nibble = 0;
    for (std::size_t k = 0; k < 4 && i + k < bits.size(); ++k) nibble |= (bits[i + k] ? 1 : 0) << k;
    out.push_back(kHex[nibble]);
  }
  return out;
}

json plan_json(const Plan& plan, const GridGeometry& g) {
  json j;
  j["kind"] = to_string(plan.kind);
  j["goal"] = {plan.goal.x, plan.goal.y};
  j["region"] = plan.region_id;
  json path = json::array();
  for (const CellIndex c : plan.path.cells) path.push_back(g.id(c));
  j["path"] = std::move(path);
  if (plan.route) {
    json stops = json::array();
    for (const auto& v : plan.route->stops) stops.push_back({v.position.x, v.position.y});
    j["route"] = std::move(stops);
  }
  return j;
}

void evaluation_json(json& frame, const RegionEvaluation& ev) {
  json regions = json::array();
  for (const auto& s : ev.scores) {
    const double cost = ev.path_costs[static_cast<std::size_t>(s.region_id)];
    regions.push_back({s.region_id, s.total, s.viewpoint_sum, s.semantic_sum, s.activated ? 1 : 0,
                       std::isfinite(cost) ? json(cost) : json(nullptr)});
  }
  frame["regions"] = std::move(regions);
  frame["order"] = ev.order;
  json vps = json::array();
  for (const auto& v : ev.viewpoints) {
    vps.push_back({v.id, v.region_id, v.position.x, v.position.y, v.s_cov, v.s_sem_density, v.s_viewpoint, v.s_bar});
  }
  frame["viewpoints"] = std::move(vps);
}

}  // namespace

std::vector<Detection> detect(const Pose& pose, std::span<const SceneObject> objects, const TruthMap& truth,
                              const FovModel& fov, const DetectionConfig& noise, double timestamp,
                              std::mt19937_64& rng) {
  std::vector<Detection> out;
  const Vec2 at = pose.position();
  for (const auto& obj : objects) {
    const Vec2 q = obj.position.planar();
    if (!visible(q, at, pose.heading, fov) || !line_of_sight(truth, at, q)) continue;
    // Four draws per visible object keep the stream aligned across knobs.
    const double miss = uniform01(rng);
    const double u_conf = uniform01(rng);
    const double u_angle = uniform01(rng);
    const double u_radius = uniform01(rng);
    if (miss < noise.false_negative_rate) continue;
    Detection d;
    d.label = obj.label;
    d.timestamp = timestamp;
    d.position = obj.position;
    if (noise.noise) {
      d.confidence = noise.confidence_min + u_conf * (noise.confidence_max - noise.confidence_min);
      const double r = noise.position_sigma * std::sqrt(u_radius);
      const double a = 2.0 * std::numbers::pi * u_angle;
      d.position.x += r * std::cos(a);
      d.position.y += r * std::sin(a);
    } else {
      d.confidence = 1.0;
    }
    out.push_back(std::move(d));
  }
  return out;
}

std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::Found: return "found";
    case Termination::StepBudget: return "step_budget";
    case Termination::NoPlan: return "no_plan";
  }
  return "unknown";
}

std::optional<Termination> termination_from_string(std::string_view name) {
  for (const auto t : {Termination::Found, Termination::StepBudget, Termination::NoPlan}) {
    if (to_string(t) == name) return t;
  }
  return std::nullopt;
}

double spl_term(const EpisodeResult& r) {
  if (!r.success) return 0.0;
  const double denom = std::max(r.path_length, r.oracle_shortest);
  return denom > 0.0 ? r.oracle_shortest / denom : 1.0;
}

Metrics compute_metrics(std::span<const EpisodeResult> results) {
  if (results.empty()) throw std::invalid_argument("compute_metrics: no episodes");
  Metrics m;
  m.episodes = results.size();
  double successes = 0.0;
  double spl = 0.0;
  for (const auto& r : results) {
    successes += r.success ? 1.0 : 0.0;
    spl += spl_term(r);
  }
  m.sr = successes / static_cast<double>(m.episodes);
  m.spl = spl / static_cast<double>(m.episodes);
  return m;
}

std::shared_ptr<MockBackend> make_mock_backend(const RelevanceSettings& settings) {
  CooccurrenceTable table;
  if (settings.table == "builtin") {
    table = CooccurrenceTable::builtin();
  } else if (settings.table == "all_unrelated") {
    table = CooccurrenceTable::all_unrelated();
  } else {
    std::ifstream in(settings.table);
    if (!in) throw ConfigError("cannot open relevance table: " + settings.table);
    std::ostringstream ss;
    ss << in.rdbuf();
    table = CooccurrenceTable::from_json(ss.str());
  }
  return std::make_shared<MockBackend>(std::move(table), settings.bands, default_aliases());
}

std::unique_ptr<RelevanceEngine> make_relevance_engine(const RelevanceSettings& settings, Clock clock,
                                                       std::unique_ptr<RelevanceBackend> primary) {
  auto mock = make_mock_backend(settings);
  if (!primary && settings.backend == "remote") {
    auto remote = RemoteConfig::from_env();
    if (!remote) throw ConfigError("relevance.backend is \"remote\" but SEMNAV_LLM_ENDPOINT is not set");
    remote->temperature = settings.temperature;
    remote->timeout_seconds = settings.timeout_seconds;
    remote->bands = settings.bands;
    const auto& vocab = mock->table().vocabulary();
    remote->vocabulary.assign(vocab.begin(), vocab.end());
    primary = std::make_unique<RemoteBackend>(std::move(*remote));
  }
  EngineConfig ec;
  ec.cache_capacity = settings.cache_capacity;
  ec.cache_ttl_seconds = settings.cache_ttl_seconds;
  ec.stop_list = settings.stop_list;
  return std::make_unique<RelevanceEngine>(std::move(primary), std::move(mock), std::move(ec), std::move(clock));
}

Pose draw_start(const Scenario& scenario, const std::string& target, double min_distance, std::uint64_t seed) {
  const TruthMap& map = *scenario.map;
  const GridGeometry& g = map.geometry();
  const OccupancyGrid grid(scenario.map);
  const auto goals = success_cells(map, scenario.objects, target, scenario.success_distance);
  const DistanceField field(grid, goals, PathMode::GroundTruth);

  std::vector<CellIndex> far;
  std::vector<CellIndex> reachable;
  std::vector<CellIndex> any;
  for (std::size_t id = 0; id < g.cell_count(); ++id) {
    const CellIndex c = g.cell_at(id);
    if (!map.free(c)) continue;
    any.push_back(c);
    if (!field.reachable(c)) continue;
    reachable.push_back(c);
    // Distance to the target itself, not to the edge of its success disk.
    if (field.cost(c) + scenario.success_distance >= min_distance) far.push_back(c);
  }
  const auto& pool = !far.empty() ? far : !reachable.empty() ? reachable : any;
  if (pool.empty()) throw ScenarioError("map has no free cell for a start pose");
  std::mt19937_64 rng(mix_seed(seed, 0x7374617274ULL));
  const auto pick = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(pool.size()));
  const double heading = -std::numbers::pi + 2.0 * std::numbers::pi * uniform01(rng);
  return Pose(g.center_of(pool[std::min(pick, pool.size() - 1)]), heading);
}

EpisodeResult run_episode(const Scenario& scenario, PolicyKind policy, const RunConfig& base_cfg,
                          const EpisodeOptions& options) {
  scenario.validate();
  base_cfg.validate();
  const RunConfig cfg = policy_config(base_cfg, policy);
  const std::uint64_t seed = scenario.seed;
  const TruthMap& truth = *scenario.map;
  const GridGeometry& g = truth.geometry();

  EpisodeResult res;
  double clock_now = 0.0;
  auto engine = make_relevance_engine(cfg.relevance, [&clock_now] { return clock_now; },
                                      options.backend_factory ? options.backend_factory() : nullptr);

  auto emit = [&](const json& j) {
    if (options.trace != nullptr) *options.trace << j.dump() << '\n';
  };
  json header;
  header["type"] = "header";
  header["schema_version"] = kTraceSchemaVersion;
  header["scenario"] = scenario.name;
  header["policy"] = to_string(policy);
  header["seed"] = seed;
  header["instruction"] = scenario.instruction;
  header["map"] = format_raster(truth);
  header["origin"] = {g.origin.x, g.origin.y};
  header["region_size"] = cfg.world.region_size;
  header["bitmap_n"] = cfg.coverage.bitmap_n;
  header["success_distance"] = scenario.success_distance;
  json objects = json::array();
  for (const auto& o : scenario.objects) objects.push_back({o.label, o.position.x, o.position.y, o.position.z});
  header["objects"] = std::move(objects);

  auto finish = [&](Termination t) {
    res.termination = t;
    res.degradation_events = engine->degradation_events().size();
    json r;
    r["type"] = "result";
    r["success"] = res.success;
    r["termination"] = to_string(t);
    r["steps"] = res.steps;
    r["path_length"] = res.path_length;
    r["oracle_shortest"] = res.oracle_shortest;
    emit(r);
    return res;
  };

  try {
    res.target = engine->parse_instruction(scenario.instruction);
  } catch (const ParseFailure&) {
    header["target"] = nullptr;
    emit(header);
    return finish(Termination::NoPlan);
  }
  const std::string& target = res.target;

  Pose pose = scenario.start ? Pose(g.center_of(g.cell_of(scenario.start->position())), scenario.start->heading)
                             : draw_start(scenario, target, cfg.episode.min_start_distance, seed);
  res.start = pose;

  {
    const OccupancyGrid oracle_grid(scenario.map);
    const auto goals = success_cells(truth, scenario.objects, target, scenario.success_distance);
    const DistanceField oracle(oracle_grid, goals, PathMode::GroundTruth);
    const double l = oracle.cost(g.cell_of(pose.position()));
    res.oracle_reachable = std::isfinite(l);
    res.oracle_shortest = res.oracle_reachable ? l : 0.0;
  }

  header["target"] = target;
  header["start"] = {pose.x, pose.y, pose.heading};
  header["oracle_shortest"] = res.oracle_shortest;
  emit(header);

  const RegionLayout layout(g.bounds(), cfg.world.region_size);
  OccupancyGrid grid(scenario.map);
  CoverageMemory memory(layout.regions(), cfg.coverage, scenario.map);
  SemanticBuffer buffer(cfg.buffer, LabelSanitizer(cfg.relevance.stop_list));
  std::map<SpatialKey, SemanticPoint> semantic_map;
  std::vector<SemanticPoint> points;
  Planner planner(policy, cfg, seed);
  if (options.observer) planner.set_observer(options.observer);
  std::mt19937_64 detect_rng(mix_seed(seed, 0x646574656374ULL));

  const double lock_radius =
      std::max(0.5 * g.cell_size, scenario.success_distance - (cfg.detection.noise ? cfg.detection.position_sigma : 0.0));
  const double sd2 = scenario.success_distance * scenario.success_distance;
  auto at_target = [&] {
    for (const auto& o : scenario.objects) {
      if (o.label == target && squared_distance(o.position.planar(), pose.position()) <= sd2) return true;
    }
    return false;
  };

  // Sense from the current pose and record the frame skeleton.
  auto perceive = [&](json& frame) {
    const auto revealed = reveal(grid, pose, cfg.world.lidar);
    const auto dets = detect(pose, scenario.objects, truth, cfg.coverage.fov, cfg.detection, clock_now, detect_rng);
    json rev = json::array();
    for (const CellIndex c : revealed) rev.push_back(g.id(c));
    json dj = json::array();
    for (const auto& d : dets) {
      dj.push_back({d.label, d.confidence, d.position.x, d.position.y, d.position.z});
      if (d.label == target) res.target_detected = true;
      buffer.insert(d);
    }
    frame["revealed"] = std::move(rev);
    frame["detections"] = std::move(dj);
  };
  auto close_frame = [&](json& frame, int region, const std::vector<StateChange>& changes) {
    frame["region"] = region;
    std::string states;
    for (const auto s : memory.states()) states.push_back(state_char(s));
    frame["states"] = std::move(states);
    if (region >= 0) {
      frame["coverage"] = memory.coverage(region);
      frame["bitmap"] = bitmap_hex(memory.memory(region));
    }
    if (!changes.empty()) {
      json ev = json::array();
      for (const auto& c : changes) ev.push_back({c.region_id, std::string(1, state_char(c.from)), std::string(1, state_char(c.to))});
      frame["transitions"] = std::move(ev);
    }
  };
  auto refresh_semantics = [&] {
    const auto scores = engine->score(buffer.labels(), target);
    for (auto& p : fuse(buffer, scores, cfg.buffer)) {
      semantic_map[spatial_key(p.position.x, p.position.y, cfg.buffer.hash_cell)] = std::move(p);
    }
    points.clear();
    for (const auto& [key, p] : semantic_map) points.push_back(p);
  };

  int region = layout.region_at(pose.position());
  json frame;
  frame["type"] = "step";
  frame["step"] = 0;
  frame["t"] = clock_now;
  frame["pose"] = {pose.x, pose.y, pose.heading};
  perceive(frame);
  close_frame(frame, region, memory.on_region_transition(-1, region, pose.position(), pose.heading));
  emit(frame);

  if (scenario.max_steps <= 0) return finish(Termination::StepBudget);

  std::optional<Plan> plan;
  std::size_t cursor = 0;
  bool region_changed = false;
  const int interval = std::max(1, cfg.episode.replan_interval);
  // Extra headings needed for the lidar sector to sweep a full circle.
  const int scan_turns = cfg.episode.scan_on_arrival && cfg.world.lidar.span < 2.0 * std::numbers::pi
                             ? static_cast<int>(std::ceil(2.0 * std::numbers::pi / cfg.world.lidar.span - 1e-9)) - 1
                             : 0;
  int scan_left = 0;
  while (true) {
    if (res.target_detected && at_target()) {
      res.success = true;
      return finish(Termination::Found);
    }
    if (res.steps >= scenario.max_steps) return finish(Termination::StepBudget);

    frame = json::object();
    if (scan_left > 0) {
      // Look-around at an exploration goal: rotate in place by one sensor span.
      --scan_left;
      pose = Pose(pose.position(), pose.heading + cfg.world.lidar.span);
    } else {
      const bool exhausted = !plan || cursor + 1 >= plan->path.cells.size();
      if (exhausted || res.steps % interval == 0 || region_changed) {
        refresh_semantics();
        const PlanningInputs in{grid, layout, memory, points, pose.position(), target, lock_radius,
                                mix_seed(seed, static_cast<std::uint64_t>(res.steps))};
        if (exhausted && plan && plan->kind == GoalKind::ShortCircuit && plan->focus) planner.consume(*plan->focus, points);
        const bool keep = !exhausted && cfg.episode.commit_to_goal && planner.still_useful(*plan, in);
        if (!keep) {
          plan = planner.plan(in);
          cursor = 0;
          ++res.planning_cycles;
          frame["plan"] = plan_json(*plan, g);
          if (plan->evaluation) evaluation_json(frame, *plan->evaluation);
          json pts = json::array();
          for (const auto& p : points) pts.push_back({p.label, p.position.x, p.position.y, p.position.z, p.relevance});
          frame["points"] = std::move(pts);
          if (plan->kind == GoalKind::None || plan->path.cells.size() < 2) {
            emit(frame);
            return finish(Termination::NoPlan);
          }
        }
      }

      const CellIndex next = plan->path.cells[++cursor];
      const Vec2 to = g.center_of(next);
      res.path_length += distance(pose.position(), to);
      const double heading = estimate_heading(pose.position(), to, pose.heading, cfg.coverage.fov.min_displacement);
      pose = Pose(to, heading);
      const bool exploring = plan->kind == GoalKind::Viewpoint || plan->kind == GoalKind::Frontier ||
                             plan->kind == GoalKind::ShortCircuit;
      if (scan_turns > 0 && exploring && cursor + 1 == plan->path.cells.size()) {
        scan_left = scan_turns;
      }
    }
    ++res.steps;
    clock_now = res.steps * cfg.episode.step_duration;

    frame["type"] = "step";
    frame["step"] = res.steps;
    frame["t"] = clock_now;
    frame["pose"] = {pose.x, pose.y, pose.heading};
    perceive(frame);
    const int now_in = layout.region_at(pose.position());
    std::vector<StateChange> changes;
    region_changed = now_in != region;
    if (region_changed) {
      changes = memory.on_region_transition(region, now_in, pose.position(), pose.heading);
      region = now_in;
    } else {
      memory.accumulate(region, pose.position(), pose.heading);
    }
    close_frame(frame, region, changes);
    emit(frame);
  }
}

}  // namespace semnav
