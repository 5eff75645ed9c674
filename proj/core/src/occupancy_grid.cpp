#include "semnav/occupancy_grid.hpp"

#include <charconv>
#include <fstream>
#include <queue>
#include <sstream>
#include <tuple>

namespace semnav {

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

// Neighbor offsets: 4 orthogonal first, then diagonals.
constexpr int kDx[8] = {1, -1, 0, 0, 1, 1, -1, -1};
constexpr int kDy[8] = {0, 0, 1, -1, 1, -1, 1, -1};

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) {
      end = text.size();
    }
    std::string_view line = text.substr(pos, end - pos);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    lines.push_back(line);
    pos = end + 1;
  }
  while (!lines.empty() && lines.back().empty()) {
    lines.pop_back();
  }
  return lines;
}

// Calls fn(from, to, step_cost) for every legal move out of `from`.
template <class Fn>
void for_each_move(const OccupancyGrid& grid, CellIndex from, PathMode mode, Fn&& fn) {
  const double cs = grid.geometry().cell_size;
  for (int k = 0; k < 8; ++k) {
    const CellIndex to{from.x + kDx[k], from.y + kDy[k]};
    if (!traversable(grid, to, mode)) {
      continue;
    }
    if (k >= 4) {
      // No corner cutting: both orthogonal neighbours must be open.
      if (!traversable(grid, {from.x + kDx[k], from.y}, mode) ||
          !traversable(grid, {from.x, from.y + kDy[k]}, mode)) {
        continue;
      }
      fn(to, cs * kSqrt2);
    } else {
      fn(to, cs);
    }
  }
}

double octile(CellIndex a, CellIndex b, double cs) {
  const double dx = std::abs(a.x - b.x);
  const double dy = std::abs(a.y - b.y);
  return cs * ((kSqrt2 - 1.0) * std::min(dx, dy) + std::max(dx, dy));
}

CellIndex checked_cell(const OccupancyGrid& grid, Vec2 p, const char* what) {
  const CellIndex c = grid.geometry().cell_of(p);
  if (!grid.geometry().in_bounds(c)) {
    throw std::invalid_argument(std::string(what) + " is outside the map");
  }
  if (grid.truth().occupied(c)) {
    throw std::invalid_argument(std::string(what) + " lies inside an occupied cell");
  }
  return c;
}

int ray_count(const SensorModel& sensor, double cell_size) {
  const double cells = std::max(1.0, sensor.range / cell_size);
  return std::max(8, static_cast<int>(std::ceil(2.0 * sensor.span * cells)));
}

template <class OnCell>
void cast_rays(const OccupancyGrid& grid, const Pose& pose, const SensorModel& sensor, OnCell&& on_cell) {
  const GridGeometry& g = grid.geometry();
  const Vec2 origin = pose.position();
  const int n = ray_count(sensor, g.cell_size);
  const bool full_circle = sensor.span >= 2.0 * std::numbers::pi - 1e-12;
  const double start = full_circle ? 0.0 : pose.heading - 0.5 * sensor.span;
  const double step = full_circle ? sensor.span / n : sensor.span / std::max(1, n - 1);
  for (int k = 0; k < n; ++k) {
    const double theta = start + step * k;
    const Vec2 end = origin + Vec2{std::cos(theta), std::sin(theta)} * sensor.range;
    traverse_segment(g, origin, end, [&](CellIndex c) {
      if (!g.in_bounds(c)) {
        return false;
      }
      on_cell(c);
      return !grid.truth().occupied(c);
    });
  }
}

}  // namespace

// ---------------------------------------------------------------------------

CellIndex GridGeometry::cell_of(Vec2 p) const {
  return {static_cast<int>(std::floor((p.x - origin.x) / cell_size)),
          static_cast<int>(std::floor((p.y - origin.y) / cell_size))};
}

TruthMap::TruthMap(int width, int height, double cell_size, Vec2 origin)
    : geom_{width, height, cell_size, origin} {
  if (width < 1 || height < 1) {
    throw std::invalid_argument("grid dimensions must be at least 1x1");
  }
  if (!(cell_size > 0.0)) {
    throw std::invalid_argument("cell_size must be positive");
  }
  occupied_.assign(geom_.cell_count(), 0);
}

std::size_t TruthMap::free_count() const {
  return static_cast<std::size_t>(std::count(occupied_.begin(), occupied_.end(), 0));
}

TruthMap parse_raster(std::string_view text) {
  const auto lines = split_lines(text);
  if (lines.empty()) {
    throw MapFormatError("line 1: missing header 'width height cell_size'");
  }
  std::istringstream header{std::string(lines[0])};
  int width = 0;
  int height = 0;
  double cell_size = 0.0;
  std::string extra;
  if (!(header >> width >> height >> cell_size) || (header >> extra)) {
    throw MapFormatError("line 1: header must be 'width height cell_size'");
  }
  if (width < 1 || height < 1 || !(cell_size > 0.0)) {
    throw MapFormatError("line 1: width/height must be >= 1 and cell_size > 0");
  }
  if (lines.size() != static_cast<std::size_t>(height) + 1) {
    throw MapFormatError("expected " + std::to_string(height) + " raster rows, found " +
                         std::to_string(lines.size() - 1));
  }
  TruthMap map(width, height, cell_size);
  for (int row = 0; row < height; ++row) {
    const std::string_view line = lines[static_cast<std::size_t>(row) + 1];
    const int line_no = row + 2;
    if (line.size() != static_cast<std::size_t>(width)) {
      throw MapFormatError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " characters, found " + std::to_string(line.size()));
    }
    const int y = height - 1 - row;
    for (int x = 0; x < width; ++x) {
      const char ch = line[static_cast<std::size_t>(x)];
      if (ch == '#') {
        map.set_occupied({x, y}, true);
      } else if (ch != '.') {
        throw MapFormatError("line " + std::to_string(line_no) + ", column " + std::to_string(x + 1) +
                             ": unexpected character '" + std::string(1, ch) + "'");
      }
    }
  }
  return map;
}

std::string format_raster(const TruthMap& map) {
  const GridGeometry& g = map.geometry();
  std::ostringstream out;
  out.precision(17);
  out << g.width << ' ' << g.height << ' ' << g.cell_size << '\n';
  for (int y = g.height - 1; y >= 0; --y) {
    for (int x = 0; x < g.width; ++x) {
      out << (map.occupied({x, y}) ? '#' : '.');
    }
    out << '\n';
  }
  return out.str();
}

TruthMap load_raster_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MapFormatError("cannot open map file '" + path.string() + "'");
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_raster(buf.str());
  } catch (const MapFormatError& e) {
    throw MapFormatError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------

OccupancyGrid::OccupancyGrid(std::shared_ptr<const TruthMap> truth) : truth_(std::move(truth)) {
  if (!truth_) {
    throw std::invalid_argument("OccupancyGrid requires a truth map");
  }
  cells_.assign(geometry().cell_count(), static_cast<std::uint8_t>(CellState::Unknown));
}

bool OccupancyGrid::observe(CellIndex c) {
  auto& cell = cells_[geometry().id(c)];
  if (cell != static_cast<std::uint8_t>(CellState::Unknown)) {
    return false;
  }
  cell = static_cast<std::uint8_t>(truth_->occupied(c) ? CellState::Occupied : CellState::Free);
  ++observed_count_;
  return true;
}

std::uint64_t OccupancyGrid::fingerprint() const {
  std::uint64_t h = 1469598103934665603ULL;
  for (const std::uint8_t v : cells_) {
    h ^= v;
    h *= 1099511628211ULL;
  }
  return h;
}

// ---------------------------------------------------------------------------

std::vector<SubRegion> partition(const Rect& world_bounds, double region_size) {
  return RegionLayout(world_bounds, region_size).regions();
}

RegionLayout::RegionLayout(const Rect& world_bounds, double region_size)
    : bounds_(world_bounds), size_(region_size) {
  if (!(region_size > 0.0)) {
    throw std::invalid_argument("region_size must be positive");
  }
  if (!(world_bounds.width() > 0.0) || !(world_bounds.height() > 0.0)) {
    throw std::invalid_argument("world bounds have zero area");
  }
  // Tolerate representation error in W/size (e.g. 1.1/0.1).
  nx_ = static_cast<int>(std::ceil(world_bounds.width() / region_size - 1e-9));
  ny_ = static_cast<int>(std::ceil(world_bounds.height() / region_size - 1e-9));
  nx_ = std::max(nx_, 1);
  ny_ = std::max(ny_, 1);
  regions_.reserve(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
  for (int iy = 0; iy < ny_; ++iy) {
    for (int ix = 0; ix < nx_; ++ix) {
      Rect r{world_bounds.min_x + ix * region_size, world_bounds.min_y + iy * region_size,
             std::min(world_bounds.min_x + (ix + 1) * region_size, world_bounds.max_x),
             std::min(world_bounds.min_y + (iy + 1) * region_size, world_bounds.max_y)};
      if (ix == nx_ - 1) r.max_x = world_bounds.max_x;
      if (iy == ny_ - 1) r.max_y = world_bounds.max_y;
      regions_.push_back({iy * nx_ + ix, r, r.center()});
    }
  }
}

int RegionLayout::region_at(Vec2 p) const {
  if (p.x < bounds_.min_x || p.y < bounds_.min_y || p.x > bounds_.max_x || p.y > bounds_.max_y) {
    return -1;
  }
  const int ix = std::clamp(static_cast<int>(std::floor((p.x - bounds_.min_x) / size_)), 0, nx_ - 1);
  const int iy = std::clamp(static_cast<int>(std::floor((p.y - bounds_.min_y) / size_)), 0, ny_ - 1);
  return iy * nx_ + ix;
}

// ---------------------------------------------------------------------------

std::vector<CellIndex> reveal(OccupancyGrid& grid, const Pose& pose, const SensorModel& sensor) {
  std::vector<CellIndex> flipped;
  const CellIndex here = grid.geometry().cell_of(pose.position());
  if (grid.geometry().in_bounds(here) && grid.observe(here)) {
    flipped.push_back(here);
  }
  cast_rays(grid, pose, sensor, [&](CellIndex c) {
    if (grid.observe(c)) {
      flipped.push_back(c);
    }
  });
  return flipped;
}

std::size_t count_reveal(const OccupancyGrid& grid, const Pose& pose, const SensorModel& sensor) {
  // Per-thread scratch stamps avoid clearing a visited array per call.
  thread_local std::vector<std::uint32_t> stamps;
  thread_local std::uint32_t epoch = 0;
  const GridGeometry& g = grid.geometry();
  if (stamps.size() < g.cell_count()) {
    stamps.assign(g.cell_count(), 0);
    epoch = 0;
  }
  if (++epoch == 0) {
    std::fill(stamps.begin(), stamps.end(), 0);
    epoch = 1;
  }
  std::size_t count = 0;
  auto consider = [&](CellIndex c) {
    auto& s = stamps[g.id(c)];
    if (s != epoch) {
      s = epoch;
      if (!grid.observed(c)) {
        ++count;
      }
    }
  };
  const CellIndex here = g.cell_of(pose.position());
  if (g.in_bounds(here)) {
    consider(here);
  }
  cast_rays(grid, pose, sensor, consider);
  return count;
}

bool line_of_sight(const TruthMap& map, Vec2 a, Vec2 b) {
  const GridGeometry& g = map.geometry();
  bool clear = true;
  traverse_segment(g, a, b, [&](CellIndex c) {
    if (g.in_bounds(c) && map.occupied(c)) {
      clear = false;
      return false;
    }
    return true;
  });
  return clear;
}

// ---------------------------------------------------------------------------

bool traversable(const OccupancyGrid& grid, CellIndex c, PathMode mode) {
  if (!grid.geometry().in_bounds(c)) {
    return false;
  }
  return mode == PathMode::GroundTruth ? !grid.truth().occupied(c) : grid.state(c) == CellState::Free;
}

std::optional<Path> shortest_path(const OccupancyGrid& grid, Vec2 a, Vec2 b, PathMode mode) {
  const GridGeometry& g = grid.geometry();
  const CellIndex start = checked_cell(grid, a, "start");
  const CellIndex goal = checked_cell(grid, b, "goal");
  if (start == goal) {
    return Path{{start}, 0.0};
  }
  if (!traversable(grid, start, mode) || !traversable(grid, goal, mode)) {
    return std::nullopt;
  }

  // A* with octile heuristic; open set ordered by (f, cell id).
  using Entry = std::tuple<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  std::vector<double> best(g.cell_count(), std::numeric_limits<double>::infinity());
  std::vector<std::int32_t> parent(g.cell_count(), -1);
  std::vector<std::uint8_t> closed(g.cell_count(), 0);
  const std::size_t start_id = g.id(start);
  const std::size_t goal_id = g.id(goal);
  best[start_id] = 0.0;
  open.emplace(octile(start, goal, g.cell_size), start_id);

  while (!open.empty()) {
    const auto [f, id] = open.top();
    open.pop();
    if (closed[id]) {
      continue;
    }
    closed[id] = 1;
    if (id == goal_id) {
      break;
    }
    const CellIndex cur = g.cell_at(id);
    for_each_move(grid, cur, mode, [&](CellIndex nb, double step) {
      const std::size_t nid = g.id(nb);
      const double cand = best[id] + step;
      if (!closed[nid] && cand < best[nid]) {
        best[nid] = cand;
        parent[nid] = static_cast<std::int32_t>(id);
        open.emplace(cand + octile(nb, goal, g.cell_size), nid);
      }
    });
  }
  if (!closed[goal_id]) {
    return std::nullopt;
  }
  Path path;
  path.length = best[goal_id];
  for (std::int64_t id = static_cast<std::int64_t>(goal_id); id >= 0; id = parent[static_cast<std::size_t>(id)]) {
    path.cells.push_back(g.cell_at(static_cast<std::size_t>(id)));
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

DistanceField::DistanceField(const OccupancyGrid& grid, CellIndex source, PathMode mode)
    : DistanceField(grid, std::span<const CellIndex>(&source, 1), mode) {}

DistanceField::DistanceField(const OccupancyGrid& grid, std::span<const CellIndex> sources, PathMode mode)
    : geom_(grid.geometry()), source_(sources.empty() ? CellIndex{-1, -1} : sources.front()) {
  cost_.assign(geom_.cell_count(), std::numeric_limits<double>::infinity());
  parent_.assign(geom_.cell_count(), -1);
  using Entry = std::tuple<double, std::size_t>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;
  for (const CellIndex s : sources) {
    if (!geom_.in_bounds(s) || grid.truth().occupied(s)) {
      continue;
    }
    const std::size_t sid = geom_.id(s);
    cost_[sid] = 0.0;
    open.emplace(0.0, sid);
  }
  while (!open.empty()) {
    const auto [d, id] = open.top();
    open.pop();
    if (d > cost_[id]) {
      continue;
    }
    for_each_move(grid, geom_.cell_at(id), mode, [&](CellIndex nb, double step) {
      const std::size_t nid = geom_.id(nb);
      const double cand = d + step;
      if (cand < cost_[nid]) {
        cost_[nid] = cand;
        parent_[nid] = static_cast<std::int32_t>(id);
        open.emplace(cand, nid);
      }
    });
  }
}

double DistanceField::cost(CellIndex c) const {
  if (!geom_.in_bounds(c)) {
    return std::numeric_limits<double>::infinity();
  }
  return cost_[geom_.id(c)];
}

bool DistanceField::reachable(CellIndex c) const { return std::isfinite(cost(c)); }

std::optional<Path> DistanceField::path_to(CellIndex c) const {
  if (!reachable(c)) {
    return std::nullopt;
  }
  Path path;
  path.length = cost(c);
  for (std::int64_t id = static_cast<std::int64_t>(geom_.id(c)); id >= 0; id = parent_[static_cast<std::size_t>(id)]) {
    path.cells.push_back(geom_.cell_at(static_cast<std::size_t>(id)));
  }
  std::reverse(path.cells.begin(), path.cells.end());
  return path;
}

std::optional<Path> shortest_path_to_any(const OccupancyGrid& grid, Vec2 a, std::span<const CellIndex> goals,
                                         PathMode mode) {
  const CellIndex start = checked_cell(grid, a, "start");
  const DistanceField field(grid, start, mode);
  std::optional<CellIndex> best;
  double best_cost = std::numeric_limits<double>::infinity();
  const GridGeometry& g = grid.geometry();
  for (const CellIndex c : goals) {
    const double d = field.cost(c);
    if (d < best_cost || (d == best_cost && best && g.id(c) < g.id(*best))) {
      best_cost = d;
      best = c;
    }
  }
  if (!best || !std::isfinite(best_cost)) {
    return std::nullopt;
  }
  return field.path_to(*best);
}

}  // namespace semnav
