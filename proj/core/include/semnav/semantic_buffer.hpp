#pragma once

// Sliding-window spatiotemporal buffer of detections. Detections are keyed by
// a planar spatial hash; each hash cell keeps its highest-confidence detection
// seen within the window. fuse() turns the buffer into relevance-weighted
// semantic points: relevance = max(alpha * S_s, i_target_floor).

#include <cstddef>
#include <cstdint>
#include <deque>
#include <limits>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "semnav/geometry.hpp"
#include "semnav/labels.hpp"

namespace semnav {

struct Detection {
  std::string label;
  double confidence = 1.0;  // [0, 1]
  Vec3 position{};
  double timestamp = 0.0;   // seconds on the episode clock
};

struct SemanticPoint {
  Vec3 position{};
  std::string label;
  double relevance = 0.0;   // (0, 1] under the default floor
};

struct BufferConfig {
  double window_duration = 30.0;  // seconds
  std::size_t capacity = 4096;    // hash cells
  double hash_cell = 0.1;         // meters
  double alpha = 1.0;
  double i_target_floor = 0.05;

  /// Throws std::invalid_argument on out-of-range values.
  void validate() const;
};

/// Hash key; ordered by (iy, ix) so iteration is row-major.
struct SpatialKey {
  std::int64_t ix = 0;
  std::int64_t iy = 0;

  friend bool operator==(SpatialKey, SpatialKey) = default;
  friend bool operator<(SpatialKey a, SpatialKey b) { return a.iy != b.iy ? a.iy < b.iy : a.ix < b.ix; }
};

/// (floor(x / hash_cell), floor(y / hash_cell)).
SpatialKey spatial_key(double x, double y, double hash_cell);

class SemanticBuffer {
 public:
  explicit SemanticBuffer(BufferConfig cfg = {}, LabelSanitizer sanitizer = {});

  /// Evicts entries older than the window relative to d.timestamp, then keeps
  /// d if it beats the cell's retained detection. Labels failing sanitization
  /// are dropped and counted.
  void insert(Detection d);

  /// Drops detections with now - timestamp > window_duration.
  void evict_expired(double now);

  std::size_t size() const { return cells_.size(); }
  std::size_t dropped() const { return dropped_; }
  const BufferConfig& config() const { return cfg_; }

  /// Retained detection per cell, in key order.
  std::vector<Detection> snapshot() const;
  /// Distinct labels currently retained, sorted.
  std::vector<std::string> labels() const;

  /// One JSON object per line: {"label","confidence","x","y","z","t"}.
  void dump_jsonl(std::ostream& out) const;

 private:
  // Monotone queue per cell: confidences strictly decrease front to back and
  // timestamps increase, so the front is the window maximum.
  struct Cell {
    std::deque<Detection> queue;
    double last_insert = 0.0;
  };

  BufferConfig cfg_;
  LabelSanitizer sanitizer_;
  std::map<SpatialKey, Cell> cells_;
  std::size_t dropped_ = 0;
  double oldest_ = std::numeric_limits<double>::infinity();  // lower bound
};

/// One point per retained detection, sorted by key. Labels absent from
/// `scores` get S_s = 0, so the floor applies.
std::vector<SemanticPoint> fuse(const SemanticBuffer& buffer, const std::map<std::string, double>& scores,
                                const BufferConfig& cfg);

/// max(alpha * score, floor).
inline double fused_relevance(double score, double alpha, double floor) {
  const double s = alpha * score;
  return s > floor ? s : floor;
}

}  // namespace semnav
