#pragma once

// Planar geometry primitives shared by every module. The world is 2D; z only
// rides along on semantic points.

#include <cmath>
#include <compare>
#include <cstdint>
#include <numbers>

namespace semnav {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(Vec2 a, double s) { return {a.x * s, a.y * s}; }
  friend bool operator==(Vec2, Vec2) = default;

  double norm() const { return std::hypot(x, y); }
  double squared_norm() const { return x * x + y * y; }
};

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  Vec2 planar() const { return {x, y}; }
  friend bool operator==(Vec3, Vec3) = default;
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }
inline double squared_distance(Vec2 a, Vec2 b) { return (a - b).squared_norm(); }

/// Wraps an angle into (-pi, pi].
double wrap_angle(double radians);

/// Absolute angular difference in [0, pi].
double angle_between(double a, double b);

struct Pose {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]

  Pose() = default;
  Pose(double px, double py, double h = 0.0) : x(px), y(py), heading(wrap_angle(h)) {}
  Pose(Vec2 p, double h = 0.0) : Pose(p.x, p.y, h) {}

  Vec2 position() const { return {x, y}; }
};

/// Axis-aligned rectangle, closed on the min side and open on the max side
/// for membership queries.
struct Rect {
  double min_x = 0.0;
  double min_y = 0.0;
  double max_x = 0.0;
  double max_y = 0.0;

  double width() const { return max_x - min_x; }
  double height() const { return max_y - min_y; }
  double area() const { return width() * height(); }
  Vec2 center() const { return {0.5 * (min_x + max_x), 0.5 * (min_y + max_y)}; }
  /// Radius of the circumscribed circle.
  double circumradius() const { return 0.5 * std::hypot(width(), height()); }
  bool contains(Vec2 p) const {
    return p.x >= min_x && p.x < max_x && p.y >= min_y && p.y < max_y;
  }
  friend bool operator==(const Rect&, const Rect&) = default;
};

struct CellIndex {
  int x = 0;
  int y = 0;

  friend bool operator==(CellIndex, CellIndex) = default;
  friend auto operator<=>(CellIndex, CellIndex) = default;
};

}  // namespace semnav
