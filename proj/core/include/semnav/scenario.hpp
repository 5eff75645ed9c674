#pragma once

// Episode definitions and their JSON file format (schema_version 1):
//
//   {
//     "schema_version": 1,
//     "name": "scene_000",
//     "map_file": "scene_000.map",          // relative to the scenario file,
//     "map": "<raster text>",               //   or the raster inline
//     "objects": [{"label": "monitor", "x": 1.0, "y": 2.0, "z": 0.8}],
//     "start": {"x": 0.5, "y": 0.5, "heading": 0.0},   // or null: random
//     "instruction": "Help me find the monitor",
//     "success_distance": 1.0,
//     "max_steps": 800,
//     "seed": 0
//   }

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/occupancy_grid.hpp"

namespace semnav {

inline constexpr int kScenarioSchemaVersion = 1;

struct SceneObject {
  std::string label;
  Vec3 position{};
};

struct Scenario {
  std::string name;
  std::shared_ptr<const TruthMap> map;
  std::vector<SceneObject> objects;
  std::optional<Pose> start;  // nullopt: drawn from the seed
  std::string instruction;
  double success_distance = 1.0;
  int max_steps = 800;
  std::uint64_t seed = 0;

  /// Throws ScenarioError when invariants fail (start in an occupied cell,
  /// success_distance <= 0, ...).
  void validate() const;
};

class ScenarioError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Map file problems surface as MapFormatError; everything else as
/// ScenarioError.
Scenario load_scenario(const std::filesystem::path& path);
Scenario parse_scenario(std::string_view json_text, const std::filesystem::path& base_dir);
/// Writes the raster inline unless map_file is given, in which case the map
/// is stored next to the scenario under that name.
void save_scenario(const Scenario& scenario, const std::filesystem::path& path,
                   const std::optional<std::string>& map_file = std::nullopt);

/// Free cells within `radius` of any object labeled `target`.
std::vector<CellIndex> success_cells(const TruthMap& map, const std::vector<SceneObject>& objects,
                                     const std::string& target, double radius);

}  // namespace semnav
