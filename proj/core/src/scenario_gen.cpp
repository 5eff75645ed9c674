#include "semnav/scenario_gen.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <stdexcept>

#include "semnav/relevance.hpp"

namespace semnav {

namespace {

double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

int uniform_int(std::mt19937_64& rng, int lo, int hi) {  // inclusive
  return lo + static_cast<int>(uniform01(rng) * (hi - lo + 1));
}

template <class T>
void shuffle(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const auto j = static_cast<std::size_t>(uniform01(rng) * static_cast<double>(i));
    std::swap(v[i - 1], v[std::min(j, i - 1)]);
  }
}

struct Room {
  int x0, x1;  // interior cell columns, inclusive
  int y0, y1;  // interior cell rows, inclusive
};

}  // namespace

const std::vector<std::string>& instruction_templates() {
  static const std::vector<std::string> templates = {
      "Help me find the {}", "I want to find a {}", "Someone might need a {}", "Please go to the {}",
      "Where is the {}?"};
  return templates;
}

namespace {

// Affinity between two kits, read off the built-in table through their first
// objects: 2 for scene-related, 1 for weakly related, 0 otherwise.
int kit_affinity(const CooccurrenceTable& table, const std::string& a, const std::string& b) {
  const auto& kits = builtin_kits();
  const auto find = [&](const std::string& n) {
    return std::find_if(kits.begin(), kits.end(), [&](const SceneKit& k) { return k.name == n; });
  };
  const auto ka = find(a), kb = find(b);
  if (ka == kits.end() || kb == kits.end()) return 0;
  switch (table.band(ka->objects.front(), kb->objects.front())) {
    case RelevanceBand::SceneRelated: return 2;
    case RelevanceBand::WeaklyRelated: return 1;
    default: return 0;
  }
}

// Reorders the first `n_rooms` kits so that related kits share walls. Rooms
// [0, per_side) line one side of the corridor and the rest the other. The best
// of a fixed number of random permutations wins; the first one found on ties.
void arrange_kits(std::vector<std::string>& kits, std::size_t n_rooms, std::size_t per_side, std::mt19937_64& rng) {
  static const CooccurrenceTable table = CooccurrenceTable::builtin();
  auto score = [&](const std::vector<std::string>& k) {
    int total = 0;
    for (std::size_t i = 0; i + 1 < n_rooms; ++i) {
      if ((i + 1) % per_side != 0) total += kit_affinity(table, k[i], k[i + 1]);
    }
    return total;
  };
  std::vector<std::string> best = kits;
  int best_score = score(best);
  std::vector<std::string> trial = kits;
  for (int round = 0; round < 200; ++round) {
    shuffle(trial, rng);
    const int sc = score(trial);
    if (sc > best_score) {
      best = trial;
      best_score = sc;
    }
  }
  kits = std::move(best);
}

}  // namespace

Scenario generate_scenario(const GeneratorConfig& cfg, std::uint64_t seed, const std::string& name) {
  if (cfg.rooms_per_side < 1 || cfg.objects_min < 1 || cfg.objects_max < cfg.objects_min) {
    throw std::invalid_argument("invalid generator configuration");
  }
  std::mt19937_64 rng(seed ^ 0x5eed5eedULL);
  const double cs = cfg.cell_size;
  auto cells = [cs](double meters) { return std::max(1, static_cast<int>(std::lround(meters / cs))); };

  std::vector<std::string> kit_names = cfg.kits;
  if (kit_names.empty()) {
    for (const auto& k : builtin_kits()) {
      if (k.name != "garden") kit_names.push_back(k.name);
    }
  }
  const int n_rooms = 2 * cfg.rooms_per_side;
  if (static_cast<int>(kit_names.size()) < n_rooms) {
    throw std::invalid_argument("not enough scene kits for the requested rooms");
  }

  // Room widths per side, in cells; both sides share the total width.
  const int depth = cells(cfg.room_depth);
  const int corridor = cells(cfg.corridor_width);
  const int door = cells(cfg.door_width);
  std::vector<int> widths(static_cast<std::size_t>(cfg.rooms_per_side));
  for (auto& w : widths) w = cells(cfg.room_width * (0.7 + 0.6 * uniform01(rng)));
  int total = 1;
  for (const int w : widths) total += w + 1;
  const int width = total;
  const int height = 1 + depth + 1 + corridor + 1 + depth + 1;

  TruthMap map(width, height, cs);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) map.set_occupied({x, y}, true);
  }
  auto carve = [&](int x0, int x1, int y0, int y1) {
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) map.set_occupied({x, y}, false);
  };
  const int corridor_y0 = 1 + depth + 1;
  const int corridor_y1 = corridor_y0 + corridor - 1;
  carve(1, width - 2, corridor_y0, corridor_y1);

  std::vector<Room> rooms;
  for (int side = 0; side < 2; ++side) {
    // Bottom row rooms use independent widths so the two sides don't align.
    std::vector<int> w = widths;
    if (side == 1) shuffle(w, rng);
    int x = 1;
    for (const int rw : w) {
      Room r{x, x + rw - 1, side == 0 ? 1 : corridor_y1 + 2, side == 0 ? depth : corridor_y1 + 1 + depth};
      carve(r.x0, r.x1, r.y0, r.y1);
      const int wall_y = side == 0 ? depth + 1 : corridor_y1 + 1;
      const int slack = std::max(0, rw - door - 2);
      const int dx = r.x0 + 1 + uniform_int(rng, 0, slack);
      carve(dx, std::min(dx + door - 1, r.x1), wall_y, wall_y);
      rooms.push_back(r);
      x += rw + 1;
    }
  }

  shuffle(kit_names, rng);
  if (cfg.coherent_layout) arrange_kits(kit_names, rooms.size(), static_cast<std::size_t>(cfg.rooms_per_side), rng);
  Scenario s;
  s.name = name;
  s.success_distance = cfg.success_distance;
  s.max_steps = cfg.max_steps;
  s.seed = seed;

  std::vector<std::vector<std::size_t>> room_objects(rooms.size());
  for (std::size_t i = 0; i < rooms.size(); ++i) {
    const auto& kit = *std::find_if(builtin_kits().begin(), builtin_kits().end(),
                                    [&](const SceneKit& k) { return k.name == kit_names[i]; });
    std::vector<std::string> labels = kit.objects;
    shuffle(labels, rng);
    const int want = std::min<int>(uniform_int(rng, cfg.objects_min, cfg.objects_max), static_cast<int>(labels.size()));
    const Room& r = rooms[i];
    for (int k = 0, placed = 0; placed < want && k < 200; ++k) {
      // Keep one cell of clearance from the walls.
      const int cx = uniform_int(rng, r.x0 + 1, std::max(r.x0 + 1, r.x1 - 1));
      const int cy = uniform_int(rng, r.y0 + 1, std::max(r.y0 + 1, r.y1 - 1));
      const Vec2 p = map.geometry().center_of({cx, cy});
      bool crowded = false;
      for (const auto& o : s.objects) {
        if (distance(o.position.planar(), p) < cfg.object_spacing) crowded = true;
      }
      if (crowded) continue;
      room_objects[i].push_back(s.objects.size());
      s.objects.push_back({labels[static_cast<std::size_t>(placed)], {p.x, p.y, 0.3 + 1.2 * uniform01(rng)}});
      ++placed;
    }
  }

  // Target: any object in a room that also holds at least one other object.
  std::vector<std::size_t> candidates;
  for (const auto& objs : room_objects) {
    if (objs.size() >= 2) candidates.insert(candidates.end(), objs.begin(), objs.end());
  }
  if (candidates.empty()) {
    throw std::runtime_error("generator placed too few objects");
  }
  const std::size_t target = candidates[std::min(candidates.size() - 1,
                                                 static_cast<std::size_t>(uniform01(rng) * candidates.size()))];
  std::string label = s.objects[target].label;
  if (uniform01(rng) < 0.5) std::replace(label.begin(), label.end(), '_', ' ');
  const auto& templates = instruction_templates();
  std::string instruction =
      templates[std::min(templates.size() - 1, static_cast<std::size_t>(uniform01(rng) * templates.size()))];
  instruction.replace(instruction.find("{}"), 2, label);
  s.instruction = instruction;

  if (!cfg.randomize_start) {
    const int sx = uniform_int(rng, 1, width - 2);
    const int sy = uniform_int(rng, corridor_y0, corridor_y1);
    const Vec2 p = map.geometry().center_of({sx, sy});
    s.start = Pose(p, uniform01(rng) < 0.5 ? 0.0 : std::numbers::pi);
  }
  s.map = std::make_shared<const TruthMap>(std::move(map));
  s.validate();
  return s;
}

}  // namespace semnav
