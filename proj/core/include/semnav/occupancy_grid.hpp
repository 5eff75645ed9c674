#pragma once

// World representation: a static ground-truth raster, the robot's belief grid
// with its monotone observation ledger, the uniform sub-region partition, and
// the grid queries built on top (ray reveal, line of sight, shortest paths).
//
// Text raster format (".map"):
//
//   <width> <height> <cell_size>
//   <height lines of exactly <width> characters>
//
// '#' is an occupied cell and '.' is a free cell. The first raster line is the
// top row (largest y); the grid origin (0, 0) is the lower-left corner of the
// bottom row. A trailing '\r' on any line is ignored.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <limits>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "semnav/geometry.hpp"

namespace semnav {

enum class CellState : std::uint8_t { Unknown, Free, Occupied };

/// Dimensions and placement of a raster; shared by truth and belief grids.
struct GridGeometry {
  int width = 0;
  int height = 0;
  double cell_size = 0.1;
  Vec2 origin{};

  friend bool operator==(const GridGeometry&, const GridGeometry&) = default;

  bool in_bounds(CellIndex c) const { return c.x >= 0 && c.y >= 0 && c.x < width && c.y < height; }
  std::size_t cell_count() const { return static_cast<std::size_t>(width) * static_cast<std::size_t>(height); }
  /// Row-major id, stable for the lifetime of the grid.
  std::size_t id(CellIndex c) const {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width) + static_cast<std::size_t>(c.x);
  }
  CellIndex cell_at(std::size_t id) const {
    return {static_cast<int>(id % static_cast<std::size_t>(width)),
            static_cast<int>(id / static_cast<std::size_t>(width))};
  }
  /// Cell containing p (may be out of bounds).
  CellIndex cell_of(Vec2 p) const;
  Vec2 center_of(CellIndex c) const {
    return {origin.x + (c.x + 0.5) * cell_size, origin.y + (c.y + 0.5) * cell_size};
  }
  Rect bounds() const {
    return {origin.x, origin.y, origin.x + width * cell_size, origin.y + height * cell_size};
  }
  bool contains(Vec2 p) const { return in_bounds(cell_of(p)); }
};

class MapFormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Static ground-truth occupancy.
class TruthMap {
 public:
  TruthMap(int width, int height, double cell_size, Vec2 origin = {});

  const GridGeometry& geometry() const { return geom_; }
  bool occupied(CellIndex c) const { return occupied_[geom_.id(c)] != 0; }
  bool free(CellIndex c) const { return geom_.in_bounds(c) && occupied_[geom_.id(c)] == 0; }
  void set_occupied(CellIndex c, bool occ) { occupied_[geom_.id(c)] = occ ? 1 : 0; }
  std::size_t free_count() const;

  friend bool operator==(const TruthMap&, const TruthMap&) = default;

 private:
  GridGeometry geom_;
  std::vector<std::uint8_t> occupied_;
};

TruthMap parse_raster(std::string_view text);
std::string format_raster(const TruthMap& map);
/// Throws MapFormatError naming the path when the file is missing or malformed.
TruthMap load_raster_file(const std::filesystem::path& path);

/// The robot's belief: cells start Unknown and acquire their ground-truth state
/// the first time they are sensed. The observed ledger never shrinks.
class OccupancyGrid {
 public:
  explicit OccupancyGrid(std::shared_ptr<const TruthMap> truth);

  const GridGeometry& geometry() const { return truth_->geometry(); }
  const TruthMap& truth() const { return *truth_; }
  const std::shared_ptr<const TruthMap>& truth_ptr() const { return truth_; }

  CellState state(CellIndex c) const { return static_cast<CellState>(cells_[geometry().id(c)]); }
  bool observed(CellIndex c) const { return cells_[geometry().id(c)] != static_cast<std::uint8_t>(CellState::Unknown); }
  bool known_free(CellIndex c) const {
    return geometry().in_bounds(c) && state(c) == CellState::Free;
  }
  std::size_t observed_count() const { return observed_count_; }

  /// Marks c observed with its true state. Returns true iff the flag flipped.
  bool observe(CellIndex c);

  /// FNV-1a digest of the observation state; equal grids hash equal.
  std::uint64_t fingerprint() const;

 private:
  std::shared_ptr<const TruthMap> truth_;
  std::vector<std::uint8_t> cells_;
  std::size_t observed_count_ = 0;
};

/// Range sensor used for map reveal and coverage scoring.
struct SensorModel {
  double range = 4.0;                     // meters
  double span = 2.0 * std::numbers::pi;   // radians, centered on the heading
};

/// One tile of the uniform partition.
struct SubRegion {
  int id = 0;
  Rect bounds{};
  Vec2 center{};
};

/// ceil(W/size) x ceil(H/size) regions, row-major ids, edge regions clipped.
/// Throws std::invalid_argument on degenerate bounds or size <= 0.
std::vector<SubRegion> partition(const Rect& world_bounds, double region_size);

/// Partition plus point lookup.
class RegionLayout {
 public:
  RegionLayout(const Rect& world_bounds, double region_size);

  const std::vector<SubRegion>& regions() const { return regions_; }
  const SubRegion& region(int id) const { return regions_.at(static_cast<std::size_t>(id)); }
  std::size_t size() const { return regions_.size(); }
  int columns() const { return nx_; }
  int rows() const { return ny_; }
  double region_size() const { return size_; }
  /// Region containing p; points on the outer max edge belong to the last
  /// row/column. Returns -1 outside the world.
  int region_at(Vec2 p) const;

 private:
  Rect bounds_;
  double size_;
  int nx_ = 0;
  int ny_ = 0;
  std::vector<SubRegion> regions_;
};

/// Visits, in order, every cell whose interior the segment a-b intersects.
/// A segment that passes exactly through a cell corner does not visit the two
/// cells that only share that corner. The visitor returns false to stop.
template <class Visitor>
void traverse_segment(const GridGeometry& g, Vec2 a, Vec2 b, Visitor&& visit);

/// Casts rays over the sensor span from pose. Cells along each ray up to and
/// including the first occupied cell become observed. Returns exactly the
/// cells whose observed flag flipped, in ray order.
std::vector<CellIndex> reveal(OccupancyGrid& grid, const Pose& pose, const SensorModel& sensor);

/// Number of cells reveal() would flip from this pose, without mutating.
std::size_t count_reveal(const OccupancyGrid& grid, const Pose& pose, const SensorModel& sensor);

/// True iff no truly occupied cell's interior intersects a-b.
bool line_of_sight(const TruthMap& map, Vec2 a, Vec2 b);

enum class PathMode { KnownFreeOnly, GroundTruth };

struct Path {
  std::vector<CellIndex> cells;  // start cell first, goal cell last
  double length = 0.0;           // meters
};

/// Whether a cell may be entered under the given mode.
bool traversable(const OccupancyGrid& grid, CellIndex c, PathMode mode);

/// Minimal-cost 8-connected path between the cells containing a and b.
/// Diagonal steps cost sqrt(2) * cell_size and may not cut corners. Returns
/// nullopt when disconnected. Throws std::invalid_argument if either endpoint
/// is out of bounds or truly occupied.
std::optional<Path> shortest_path(const OccupancyGrid& grid, Vec2 a, Vec2 b, PathMode mode);

/// Single-source shortest-path tree.
class DistanceField {
 public:
  DistanceField(const OccupancyGrid& grid, CellIndex source, PathMode mode);
  /// Multi-source: cost to the nearest source. Occupied sources are ignored.
  DistanceField(const OccupancyGrid& grid, std::span<const CellIndex> sources, PathMode mode);

  /// Infinity for unreachable cells.
  double cost(CellIndex c) const;
  bool reachable(CellIndex c) const;
  std::optional<Path> path_to(CellIndex c) const;
  CellIndex source() const { return source_; }

 private:
  GridGeometry geom_;
  CellIndex source_;
  std::vector<double> cost_;
  std::vector<std::int32_t> parent_;
};

/// Cheapest path from the cell containing a to any goal cell; nullopt if none
/// is reachable. Ties go to the lower cell id.
std::optional<Path> shortest_path_to_any(const OccupancyGrid& grid, Vec2 a,
                                         std::span<const CellIndex> goals, PathMode mode);

// ---------------------------------------------------------------------------

template <class Visitor>
void traverse_segment(const GridGeometry& g, Vec2 a, Vec2 b, Visitor&& visit) {
  const double ux = (a.x - g.origin.x) / g.cell_size;
  const double uy = (a.y - g.origin.y) / g.cell_size;
  const double vx = (b.x - g.origin.x) / g.cell_size;
  const double vy = (b.y - g.origin.y) / g.cell_size;
  const double dx = vx - ux;
  const double dy = vy - uy;

  int cx = static_cast<int>(std::floor(ux));
  int cy = static_cast<int>(std::floor(uy));
  const int step_x = dx > 0 ? 1 : (dx < 0 ? -1 : 0);
  const int step_y = dy > 0 ? 1 : (dy < 0 ? -1 : 0);
  constexpr double inf = std::numeric_limits<double>::infinity();
  const double t_delta_x = step_x != 0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = step_y != 0 ? 1.0 / std::abs(dy) : inf;
  double t_max_x = step_x > 0 ? (std::floor(ux) + 1.0 - ux) * t_delta_x
                   : step_x < 0 ? (ux - std::floor(ux)) * t_delta_x
                                : inf;
  double t_max_y = step_y > 0 ? (std::floor(uy) + 1.0 - uy) * t_delta_y
                   : step_y < 0 ? (uy - std::floor(uy)) * t_delta_y
                                : inf;

  constexpr double corner_eps = 1e-12;
  while (true) {
    if (!visit(CellIndex{cx, cy})) {
      return;
    }
    const double t_next = std::min(t_max_x, t_max_y);
    if (!(t_next < 1.0)) {
      return;
    }
    if (std::abs(t_max_x - t_max_y) <= corner_eps * std::max(1.0, t_next)) {
      // Exact corner crossing: the side cells only touch the segment.
      cx += step_x;
      cy += step_y;
      t_max_x += t_delta_x;
      t_max_y += t_delta_y;
    } else if (t_max_x < t_max_y) {
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      cy += step_y;
      t_max_y += t_delta_y;
    }
  }
}

}  // namespace semnav
