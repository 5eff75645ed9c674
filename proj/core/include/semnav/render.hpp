#pragma once

// Trace replay and raster rendering. A trace is the JSONL stream written by
// run_episode; any step can be reconstructed from the header plus the frames
// up to it.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/occupancy_grid.hpp"

namespace semnav {

class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TracePoint {
  std::string label;
  Vec2 position{};
  double relevance = 0.0;
};

struct TraceViewpoint {
  int region_id = -1;
  Vec2 position{};
  double s_viewpoint = 0.0;
};

/// Everything needed to draw one frame.
struct FrameState {
  int frame = 0;
  std::vector<std::uint8_t> observed;   // per cell id
  std::vector<Vec2> route;              // poses 0..frame
  std::string region_states;            // 'I', 'A', 'W' per region id
  std::vector<TracePoint> points;       // latest planning cycle at or before frame
  std::vector<TraceViewpoint> viewpoints;
  std::vector<Vec2> planned_route;
};

class TraceReplay {
 public:
  /// Throws TraceError on malformed input.
  explicit TraceReplay(std::istream& in);
  static TraceReplay load(const std::filesystem::path& path);

  int frame_count() const { return static_cast<int>(frames_.size()); }
  /// Throws TraceError listing the valid range when frame is out of range.
  FrameState state_at(int frame) const;

  const TruthMap& map() const { return map_; }
  double region_size() const { return region_size_; }
  double success_distance() const { return success_distance_; }
  const std::optional<std::string>& target() const { return target_; }
  /// Positions of objects labeled with the target.
  const std::vector<Vec2>& target_positions() const { return targets_; }

 private:
  struct Frame {
    Vec2 pose;
    std::vector<std::size_t> revealed;
    std::string states;
    bool planned = false;
    std::vector<TracePoint> points;
    std::vector<TraceViewpoint> viewpoints;
    std::vector<Vec2> planned_route;
  };

  TruthMap map_{1, 1, 1.0};
  double region_size_ = 4.0;
  double success_distance_ = 1.0;
  std::optional<std::string> target_;
  std::vector<Vec2> targets_;
  std::vector<Frame> frames_;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

class Image {
 public:
  Image(int width, int height, Rgb fill = {});
  int width() const { return w_; }
  int height() const { return h_; }
  Rgb at(int x, int y) const;
  void set(int x, int y, Rgb c);  // silently clipped
  /// Binary P6.
  void write_ppm(std::ostream& out) const;

 private:
  int w_, h_;
  std::vector<Rgb> px_;
};

struct RenderOptions {
  int pixels_per_cell = 4;
};

/// Pixel containing world point p; row 0 is the top of the map.
struct Pixel {
  int x = 0;
  int y = 0;
};
Pixel to_pixel(const GridGeometry& g, Vec2 p, const RenderOptions& opts = {});

/// Occupancy in gray levels (unknown mid, free light, occupied dark), region
/// grid with Active/Worthless tints, semantic points sized by relevance,
/// viewpoints colored by score, the travelled route, and the success circle.
Image render_frame(const TraceReplay& trace, int frame, const RenderOptions& opts = {});

}  // namespace semnav
