#include "semnav/config.hpp"

#include <fstream>
#include <map>
#include <numbers>
#include <sstream>
#include <vector>

#include <json.hpp>

namespace semnav {

using nlohmann::json;

namespace {

constexpr std::array<std::string_view, 4> kBandKeys = {"same_scene_strong", "scene_related", "weakly_related",
                                                       "unrelated"};

int line_at(std::string_view text, std::size_t pos) {
  pos = std::min(pos, text.size());
  return 1 + static_cast<int>(std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

class Reader {
 public:
  Reader(std::string_view text, std::string_view source) : text_(text), source_(source) {}

  [[noreturn]] void fail(const std::vector<std::string>& path, const std::string& msg) const {
    std::ostringstream out;
    out << source_ << ':' << line_of(path) << ": " << msg;
    throw ConfigError(out.str());
  }

  int line_of(const std::vector<std::string>& path) const {
    std::size_t pos = 0;
    for (const auto& key : path) {
      const std::size_t found = text_.find("\"" + key + "\"", pos);
      if (found == std::string_view::npos) break;
      pos = found;
    }
    return line_at(text_, pos);
  }

  static std::string dotted(const std::vector<std::string>& path) {
    std::string out;
    for (const auto& p : path) {
      if (!out.empty()) out += '.';
      out += p;
    }
    return out;
  }

  const json& section(const json& root, const std::string& name, std::vector<std::string>& path) const {
    static const json empty = json::object();
    path = {name};
    if (!root.contains(name)) return empty;
    const json& s = root.at(name);
    if (!s.is_object()) fail(path, "'" + name + "' must be an object");
    return s;
  }

  void check_keys(const json& obj, const std::vector<std::string>& path,
                  std::initializer_list<std::string_view> allowed) const {
    for (const auto& [key, value] : obj.items()) {
      if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
        auto p = path;
        p.push_back(key);
        fail(p, "unknown key '" + dotted(p) + "'");
      }
    }
  }

  template <class T>
  void read(const json& obj, std::vector<std::string> path, const std::string& key, T& out) const {
    if (!obj.contains(key)) return;
    path.push_back(key);
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) fail(path, "'" + dotted(path) + "' must be a boolean");
      } else if constexpr (std::is_integral_v<T>) {
        if (!v.is_number_integer()) fail(path, "'" + dotted(path) + "' must be an integer");
        if constexpr (std::is_unsigned_v<T>) {
          if (v.get<std::int64_t>() < 0) fail(path, "'" + dotted(path) + "' must be non-negative");
        }
      } else if constexpr (std::is_floating_point_v<T>) {
        if (!v.is_number()) fail(path, "'" + dotted(path) + "' must be a number");
      } else {
        if (!v.is_string()) fail(path, "'" + dotted(path) + "' must be a string");
      }
      out = v.get<T>();
    } catch (const json::exception& e) {
      fail(path, "'" + dotted(path) + "': " + e.what());
    }
  }

 private:
  std::string_view text_;
  std::string_view source_;
};

std::string_view aggregation_name(SemanticAggregation a) {
  return a == SemanticAggregation::SumAllViewpoints ? "sum_all_viewpoints" : "single_best";
}

}  // namespace

void DetectionConfig::validate() const {
  if (!(confidence_min >= 0.0 && confidence_max <= 1.0 && confidence_min <= confidence_max)) {
    throw std::invalid_argument("detection.confidence_min must satisfy 0 <= min <= max <= 1");
  }
  if (position_sigma < 0.0) throw std::invalid_argument("detection.position_sigma must be >= 0");
  if (!(false_negative_rate >= 0.0 && false_negative_rate <= 1.0)) {
    throw std::invalid_argument("detection.false_negative_rate must be in [0, 1]");
  }
}

void RunConfig::validate() const {
  try {
    if (version != kConfigVersion) {
      throw std::invalid_argument("version " + std::to_string(version) + " is not supported (expected " +
                                  std::to_string(kConfigVersion) + ")");
    }
    if (!(world.region_size > 0.0)) throw std::invalid_argument("world.region_size must be > 0");
    if (!(world.lidar.range > 0.0)) throw std::invalid_argument("world.lidar_range must be > 0");
    if (!(world.lidar.span > 0.0 && world.lidar.span <= 2.0 * std::numbers::pi + 1e-12)) {
      throw std::invalid_argument("world.lidar_span must be in (0, 2*pi]");
    }
    buffer.validate();
    relevance.bands.validate();
    if (relevance.backend != "mock" && relevance.backend != "remote") {
      throw std::invalid_argument("relevance.backend must be 'mock' or 'remote'");
    }
    if (relevance.cache_capacity == 0) throw std::invalid_argument("relevance.cache_capacity must be > 0");
    if (!(relevance.cache_ttl_seconds > 0.0)) throw std::invalid_argument("relevance.cache_ttl_seconds must be > 0");
    if (!(relevance.timeout_seconds > 0.0)) throw std::invalid_argument("relevance.timeout_seconds must be > 0");
    sampler.validate();
    evaluator.validate();
    coverage.validate();
    detection.validate();
    if (episode.replan_interval < 1) throw std::invalid_argument("episode.replan_interval must be >= 1");
    if (!(episode.step_duration > 0.0)) throw std::invalid_argument("episode.step_duration must be > 0");
    if (episode.min_start_distance < 0.0) throw std::invalid_argument("episode.min_start_distance must be >= 0");
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
}

RunConfig parse_run_config(std::string_view text, std::string_view source) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::parse_error& e) {
    std::ostringstream out;
    out << source << ':' << line_at(text, e.byte > 0 ? e.byte - 1 : 0) << ": invalid JSON: " << e.what();
    throw ConfigError(out.str());
  }
  const Reader r(text, source);
  if (!root.is_object()) r.fail({}, "configuration must be a JSON object");
  r.check_keys(root, {},
               {"version", "world", "buffer", "relevance", "sampler", "evaluator", "coverage", "detection", "episode"});
  if (!root.contains("version")) r.fail({}, "missing mandatory key 'version'");

  RunConfig cfg;
  r.read(root, {}, "version", cfg.version);
  if (cfg.version != kConfigVersion) {
    r.fail({"version"}, "version " + std::to_string(cfg.version) + " is not supported (expected " +
                            std::to_string(kConfigVersion) + ")");
  }
  std::vector<std::string> p;

  const json& world = r.section(root, "world", p);
  r.check_keys(world, p, {"region_size", "lidar_range", "lidar_span"});
  r.read(world, p, "region_size", cfg.world.region_size);
  r.read(world, p, "lidar_range", cfg.world.lidar.range);
  r.read(world, p, "lidar_span", cfg.world.lidar.span);

  const json& buffer = r.section(root, "buffer", p);
  r.check_keys(buffer, p, {"window_duration", "capacity", "hash_cell", "alpha", "i_target_floor"});
  r.read(buffer, p, "window_duration", cfg.buffer.window_duration);
  r.read(buffer, p, "capacity", cfg.buffer.capacity);
  r.read(buffer, p, "hash_cell", cfg.buffer.hash_cell);
  r.read(buffer, p, "alpha", cfg.buffer.alpha);
  r.read(buffer, p, "i_target_floor", cfg.buffer.i_target_floor);

  const json& rel = r.section(root, "relevance", p);
  r.check_keys(rel, p, {"backend", "table", "bands", "cache_capacity", "cache_ttl_seconds", "stop_list", "temperature",
                        "timeout_seconds"});
  r.read(rel, p, "backend", cfg.relevance.backend);
  r.read(rel, p, "table", cfg.relevance.table);
  r.read(rel, p, "cache_capacity", cfg.relevance.cache_capacity);
  r.read(rel, p, "cache_ttl_seconds", cfg.relevance.cache_ttl_seconds);
  r.read(rel, p, "temperature", cfg.relevance.temperature);
  r.read(rel, p, "timeout_seconds", cfg.relevance.timeout_seconds);
  if (rel.contains("stop_list")) {
    const auto& sl = rel.at("stop_list");
    if (!sl.is_array()) r.fail({"relevance", "stop_list"}, "'relevance.stop_list' must be an array of strings");
    cfg.relevance.stop_list.clear();
    for (const auto& w : sl) {
      if (!w.is_string()) r.fail({"relevance", "stop_list"}, "'relevance.stop_list' must be an array of strings");
      cfg.relevance.stop_list.insert(w.get<std::string>());
    }
  }
  if (rel.contains("bands")) {
    const auto& bands = rel.at("bands");
    const std::vector<std::string> bp{"relevance", "bands"};
    if (!bands.is_object()) r.fail(bp, "'relevance.bands' must be an object");
    r.check_keys(bands, bp, {kBandKeys[0], kBandKeys[1], kBandKeys[2], kBandKeys[3]});
    auto ranges = cfg.relevance.bands.ranges();
    for (std::size_t i = 0; i < kBandKeys.size(); ++i) {
      const std::string key(kBandKeys[i]);
      if (!bands.contains(key)) continue;
      const auto& v = bands.at(key);
      if (!v.is_array() || v.size() != 2 || !v[0].is_number() || !v[1].is_number()) {
        r.fail({"relevance", "bands", key}, "'relevance.bands." + key + "' must be [lo, hi]");
      }
      ranges[i] = {v[0].get<double>(), v[1].get<double>()};
    }
    try {
      cfg.relevance.bands = BandTable(ranges);
    } catch (const std::invalid_argument& e) {
      r.fail(bp, e.what());
    }
  }

  const json& sampler = r.section(root, "sampler", p);
  r.check_keys(sampler, p,
               {"samples_per_region", "density_radius", "lambda1", "lambda2", "keep_k", "min_valid_relevance",
                "min_coverage_gain"});
  r.read(sampler, p, "samples_per_region", cfg.sampler.samples_per_region);
  r.read(sampler, p, "density_radius", cfg.sampler.density_radius);
  r.read(sampler, p, "lambda1", cfg.sampler.lambda1);
  r.read(sampler, p, "lambda2", cfg.sampler.lambda2);
  r.read(sampler, p, "keep_k", cfg.sampler.keep_k);
  r.read(sampler, p, "min_valid_relevance", cfg.sampler.min_valid_relevance);
  r.read(sampler, p, "min_coverage_gain", cfg.sampler.min_coverage_gain);

  const json& ev = r.section(root, "evaluator", p);
  r.check_keys(ev, p, {"r_xy", "activation_threshold", "phase1_relevance_threshold", "semantic_aggregation"});
  r.read(ev, p, "r_xy", cfg.evaluator.r_xy);
  r.read(ev, p, "activation_threshold", cfg.evaluator.activation_threshold);
  r.read(ev, p, "phase1_relevance_threshold", cfg.evaluator.phase1_relevance_threshold);
  if (ev.contains("semantic_aggregation")) {
    std::string agg;
    r.read(ev, p, "semantic_aggregation", agg);
    if (agg == "sum_all_viewpoints") {
      cfg.evaluator.aggregation = SemanticAggregation::SumAllViewpoints;
    } else if (agg == "single_best") {
      cfg.evaluator.aggregation = SemanticAggregation::SingleBest;
    } else {
      r.fail({"evaluator", "semantic_aggregation"},
             "'evaluator.semantic_aggregation' must be 'sum_all_viewpoints' or 'single_best'");
    }
  }

  const json& cov = r.section(root, "coverage", p);
  r.check_keys(cov, p, {"bitmap_n", "fov_radius", "fov_angle", "tau", "min_displacement", "occlusion_aware"});
  r.read(cov, p, "bitmap_n", cfg.coverage.bitmap_n);
  r.read(cov, p, "fov_radius", cfg.coverage.fov.radius);
  r.read(cov, p, "fov_angle", cfg.coverage.fov.angle);
  r.read(cov, p, "tau", cfg.coverage.tau);
  r.read(cov, p, "min_displacement", cfg.coverage.fov.min_displacement);
  r.read(cov, p, "occlusion_aware", cfg.coverage.occlusion_aware);

  const json& det = r.section(root, "detection", p);
  r.check_keys(det, p, {"noise", "confidence_min", "confidence_max", "position_sigma", "false_negative_rate"});
  r.read(det, p, "noise", cfg.detection.noise);
  r.read(det, p, "confidence_min", cfg.detection.confidence_min);
  r.read(det, p, "confidence_max", cfg.detection.confidence_max);
  r.read(det, p, "position_sigma", cfg.detection.position_sigma);
  r.read(det, p, "false_negative_rate", cfg.detection.false_negative_rate);

  const json& epi = r.section(root, "episode", p);
  r.check_keys(epi, p, {"replan_interval", "step_duration", "commit_to_goal", "min_start_distance", "scan_on_arrival"});
  r.read(epi, p, "replan_interval", cfg.episode.replan_interval);
  r.read(epi, p, "step_duration", cfg.episode.step_duration);
  r.read(epi, p, "commit_to_goal", cfg.episode.commit_to_goal);
  r.read(epi, p, "min_start_distance", cfg.episode.min_start_distance);
  r.read(epi, p, "scan_on_arrival", cfg.episode.scan_on_arrival);

  // Coverage gain is scored omnidirectionally: a viewpoint has no heading yet.
  cfg.sampler.sensor = SensorModel{cfg.world.lidar.range, 2.0 * std::numbers::pi};
  try {
    cfg.validate();
  } catch (const ConfigError& e) {
    // Messages lead with the dotted key, e.g. "sampler.keep_k must be >= 1".
    std::string msg = e.what();
    std::vector<std::string> path;
    std::string head = msg.substr(0, msg.find(' '));
    for (std::size_t pos = 0; pos <= head.size();) {
      const std::size_t dot = head.find('.', pos);
      path.push_back(head.substr(pos, dot == std::string::npos ? std::string::npos : dot - pos));
      if (dot == std::string::npos) break;
      pos = dot + 1;
    }
    r.fail(path, msg);
  }
  return cfg;
}

RunConfig load_run_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("cannot open config file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_run_config(buf.str(), path.string());
}

std::string serialize_run_config(const RunConfig& cfg) {
  json bands = json::object();
  for (std::size_t i = 0; i < kBandKeys.size(); ++i) {
    const auto& r = cfg.relevance.bands.ranges()[i];
    bands[std::string(kBandKeys[i])] = {r.lo, r.hi};
  }
  json root = {
      {"version", cfg.version},
      {"world",
       {{"region_size", cfg.world.region_size},
        {"lidar_range", cfg.world.lidar.range},
        {"lidar_span", cfg.world.lidar.span}}},
      {"buffer",
       {{"window_duration", cfg.buffer.window_duration},
        {"capacity", cfg.buffer.capacity},
        {"hash_cell", cfg.buffer.hash_cell},
        {"alpha", cfg.buffer.alpha},
        {"i_target_floor", cfg.buffer.i_target_floor}}},
      {"relevance",
       {{"backend", cfg.relevance.backend},
        {"table", cfg.relevance.table},
        {"bands", bands},
        {"cache_capacity", cfg.relevance.cache_capacity},
        {"cache_ttl_seconds", cfg.relevance.cache_ttl_seconds},
        {"stop_list", cfg.relevance.stop_list},
        {"temperature", cfg.relevance.temperature},
        {"timeout_seconds", cfg.relevance.timeout_seconds}}},
      {"sampler",
       {{"samples_per_region", cfg.sampler.samples_per_region},
        {"density_radius", cfg.sampler.density_radius},
        {"lambda1", cfg.sampler.lambda1},
        {"lambda2", cfg.sampler.lambda2},
        {"keep_k", cfg.sampler.keep_k},
        {"min_valid_relevance", cfg.sampler.min_valid_relevance},
        {"min_coverage_gain", cfg.sampler.min_coverage_gain}}},
      {"evaluator",
       {{"r_xy", cfg.evaluator.r_xy},
        {"activation_threshold", cfg.evaluator.activation_threshold},
        {"phase1_relevance_threshold", cfg.evaluator.phase1_relevance_threshold},
        {"semantic_aggregation", aggregation_name(cfg.evaluator.aggregation)}}},
      {"coverage",
       {{"bitmap_n", cfg.coverage.bitmap_n},
        {"fov_radius", cfg.coverage.fov.radius},
        {"fov_angle", cfg.coverage.fov.angle},
        {"tau", cfg.coverage.tau},
        {"min_displacement", cfg.coverage.fov.min_displacement},
        {"occlusion_aware", cfg.coverage.occlusion_aware}}},
      {"detection",
       {{"noise", cfg.detection.noise},
        {"confidence_min", cfg.detection.confidence_min},
        {"confidence_max", cfg.detection.confidence_max},
        {"position_sigma", cfg.detection.position_sigma},
        {"false_negative_rate", cfg.detection.false_negative_rate}}},
      {"episode",
       {{"replan_interval", cfg.episode.replan_interval},
        {"step_duration", cfg.episode.step_duration},
        {"commit_to_goal", cfg.episode.commit_to_goal},
        {"min_start_distance", cfg.episode.min_start_distance},
        {"scan_on_arrival", cfg.episode.scan_on_arrival}}},
  };
  return root.dump(2) + "\n";
}

}  // namespace semnav
