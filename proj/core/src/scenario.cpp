#include "semnav/scenario.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

namespace semnav {

using nlohmann::json;

void Scenario::validate() const {
  if (!map) throw ScenarioError("scenario has no map");
  if (!(success_distance > 0.0)) throw ScenarioError("success_distance must be > 0");
  if (max_steps < 0) throw ScenarioError("max_steps must be >= 0");
  const GridGeometry& g = map->geometry();
  if (start) {
    const CellIndex c = g.cell_of(start->position());
    if (!g.in_bounds(c)) throw ScenarioError("start pose lies outside the map");
    if (map->occupied(c)) throw ScenarioError("start pose lies in an occupied cell");
  }
  for (const auto& o : objects) {
    if (o.label.empty()) throw ScenarioError("object with empty label");
    if (!g.contains(o.position.planar())) throw ScenarioError("object '" + o.label + "' lies outside the map");
  }
}

Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw ScenarioError(std::string("invalid scenario JSON: ") + e.what());
  }
  try {
    const int version = j.at("schema_version").get<int>();
    if (version != kScenarioSchemaVersion) {
      throw ScenarioError("unsupported scenario schema_version " + std::to_string(version));
    }
    Scenario s;
    s.name = j.value("name", std::string("scenario"));
    if (j.contains("map_file")) {
      s.map = std::make_shared<TruthMap>(load_raster_file(base_dir / j.at("map_file").get<std::string>()));
    } else if (j.contains("map")) {
      s.map = std::make_shared<TruthMap>(parse_raster(j.at("map").get<std::string>()));
    } else {
      throw ScenarioError("scenario needs 'map_file' or 'map'");
    }
    for (const auto& o : j.value("objects", json::array())) {
      s.objects.push_back({o.at("label").get<std::string>(),
                           {o.at("x").get<double>(), o.at("y").get<double>(), o.value("z", 0.0)}});
    }
    if (j.contains("start") && !j.at("start").is_null()) {
      const auto& st = j.at("start");
      s.start = Pose(st.at("x").get<double>(), st.at("y").get<double>(), st.value("heading", 0.0));
    }
    s.instruction = j.at("instruction").get<std::string>();
    s.success_distance = j.value("success_distance", 1.0);
    s.max_steps = j.value("max_steps", 800);
    s.seed = j.value("seed", std::uint64_t{0});
    s.validate();
    return s;
  } catch (const json::exception& e) {
    throw ScenarioError(std::string("malformed scenario: ") + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ScenarioError("cannot open scenario file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_scenario(buf.str(), path.parent_path());
  } catch (const ScenarioError& e) {
    throw ScenarioError(path.string() + ": " + e.what());
  }
}

void save_scenario(const Scenario& scenario, const std::filesystem::path& path,
                   const std::optional<std::string>& map_file) {
  json j;
  j["schema_version"] = kScenarioSchemaVersion;
  j["name"] = scenario.name;
  if (map_file) {
    j["map_file"] = *map_file;
    std::ofstream map_out(path.parent_path() / *map_file, std::ios::binary);
    map_out << format_raster(*scenario.map);
    if (!map_out) throw ScenarioError("cannot write map file next to '" + path.string() + "'");
  } else {
    j["map"] = format_raster(*scenario.map);
  }
  json objects = json::array();
  for (const auto& o : scenario.objects) {
    objects.push_back({{"label", o.label}, {"x", o.position.x}, {"y", o.position.y}, {"z", o.position.z}});
  }
  j["objects"] = objects;
  j["start"] = scenario.start
                   ? json{{"x", scenario.start->x}, {"y", scenario.start->y}, {"heading", scenario.start->heading}}
                   : json(nullptr);
  j["instruction"] = scenario.instruction;
  j["success_distance"] = scenario.success_distance;
  j["max_steps"] = scenario.max_steps;
  j["seed"] = scenario.seed;
  std::ofstream out(path, std::ios::binary);
  out << j.dump(2) << '\n';
  if (!out) throw ScenarioError("cannot write scenario file '" + path.string() + "'");
}

std::vector<CellIndex> success_cells(const TruthMap& map, const std::vector<SceneObject>& objects,
                                     const std::string& target, double radius) {
  const GridGeometry& g = map.geometry();
  std::vector<CellIndex> out;
  for (int y = 0; y < g.height; ++y) {
    for (int x = 0; x < g.width; ++x) {
      const CellIndex c{x, y};
      if (map.occupied(c)) continue;
      for (const auto& o : objects) {
        if (o.label == target && distance(g.center_of(c), o.position.planar()) <= radius) {
          out.push_back(c);
          break;
        }
      }
    }
  }
  return out;
}

}  // namespace semnav
