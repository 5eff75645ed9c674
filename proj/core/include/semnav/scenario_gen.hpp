#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "semnav/scenario.hpp"

namespace semnav {

/// Rooms-and-corridor layouts: one straight corridor with a row of rooms on
/// each side, one door per room, and each room furnished from one scene kit
/// so that related objects cluster spatially.
struct GeneratorConfig {
  int rooms_per_side = 3;
  double room_width = 6.0;       // meters, mean; each room varies by +-30%
  double room_depth = 5.0;       // meters
  double corridor_width = 1.6;   // meters
  double door_width = 1.0;       // meters
  double cell_size = 0.2;        // meters
  int objects_min = 4;           // per room
  int objects_max = 6;
  double object_spacing = 0.8;   // meters, minimum between objects
  int max_steps = 900;
  double success_distance = 1.0;
  bool randomize_start = true;   // leave start unset so each seed draws one
  /// Put kits that the built-in co-occurrence table relates into neighbouring
  /// rooms on the same side, the way kitchens sit next to dining rooms.
  bool coherent_layout = true;
  /// Kits to draw from; empty means every built-in kit except "garden".
  std::vector<std::string> kits;
};

Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed, const std::string& name);

/// Instruction phrasings used by the generator.
const std::vector<std::string>& instruction_templates();

}  // namespace semnav
