#include "semnav/semantic_buffer.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace semnav {

void BufferConfig::validate() const {
  if (!(window_duration > 0.0)) throw std::invalid_argument("buffer.window_duration must be > 0");
  if (capacity == 0) throw std::invalid_argument("buffer.capacity must be > 0");
  if (!(hash_cell > 0.0)) throw std::invalid_argument("buffer.hash_cell must be > 0");
  if (!(alpha > 0.0)) throw std::invalid_argument("buffer.alpha must be > 0");
  if (!(i_target_floor > 0.0)) throw std::invalid_argument("buffer.i_target_floor must be > 0");
}

SpatialKey spatial_key(double x, double y, double hash_cell) {
  return {static_cast<std::int64_t>(std::floor(x / hash_cell)),
          static_cast<std::int64_t>(std::floor(y / hash_cell))};
}

SemanticBuffer::SemanticBuffer(BufferConfig cfg, LabelSanitizer sanitizer)
    : cfg_(cfg), sanitizer_(std::move(sanitizer)) {
  cfg_.validate();
}

void SemanticBuffer::evict_expired(double now) {
  if (cells_.empty() || now - oldest_ <= cfg_.window_duration) {
    return;
  }
  double oldest = std::numeric_limits<double>::infinity();
  for (auto it = cells_.begin(); it != cells_.end();) {
    auto& q = it->second.queue;
    while (!q.empty() && now - q.front().timestamp > cfg_.window_duration) {
      q.pop_front();
    }
    if (q.empty()) {
      it = cells_.erase(it);
      continue;
    }
    for (const auto& d : q) {
      oldest = std::min(oldest, d.timestamp);
    }
    ++it;
  }
  oldest_ = oldest;
}

void SemanticBuffer::insert(Detection d) {
  auto label = sanitizer_.sanitize(d.label);
  if (!label || !(d.confidence >= 0.0 && d.confidence <= 1.0)) {
    ++dropped_;
    return;
  }
  d.label = std::move(*label);
  evict_expired(d.timestamp);

  const SpatialKey key = spatial_key(d.position.x, d.position.y, cfg_.hash_cell);
  Cell& cell = cells_[key];
  // Ties go to the newer detection.
  while (!cell.queue.empty() && cell.queue.back().confidence <= d.confidence) {
    cell.queue.pop_back();
  }
  oldest_ = std::min(oldest_, d.timestamp);
  cell.last_insert = d.timestamp;
  cell.queue.push_back(std::move(d));

  while (cells_.size() > cfg_.capacity) {
    // Evict the cell that was refreshed least recently; ties by key order.
    auto victim = cells_.begin();
    for (auto jt = cells_.begin(); jt != cells_.end(); ++jt) {
      if (jt->second.last_insert < victim->second.last_insert) {
        victim = jt;
      }
    }
    cells_.erase(victim);
  }
}

std::vector<Detection> SemanticBuffer::snapshot() const {
  std::vector<Detection> out;
  out.reserve(cells_.size());
  for (const auto& [key, cell] : cells_) {
    out.push_back(cell.queue.front());
  }
  return out;
}

std::vector<std::string> SemanticBuffer::labels() const {
  std::set<std::string> unique;
  for (const auto& [key, cell] : cells_) {
    unique.insert(cell.queue.front().label);
  }
  return {unique.begin(), unique.end()};
}

void SemanticBuffer::dump_jsonl(std::ostream& out) const {
  for (const auto& d : snapshot()) {
    nlohmann::json j{{"label", d.label}, {"confidence", d.confidence}, {"x", d.position.x},
                     {"y", d.position.y}, {"z", d.position.z},      {"t", d.timestamp}};
    out << j.dump() << '\n';
  }
}

std::vector<SemanticPoint> fuse(const SemanticBuffer& buffer, const std::map<std::string, double>& scores,
                                const BufferConfig& cfg) {
  std::vector<SemanticPoint> points;
  for (auto& d : buffer.snapshot()) {
    const auto it = scores.find(d.label);
    const double s = it == scores.end() ? 0.0 : it->second;
    points.push_back({d.position, std::move(d.label), fused_relevance(s, cfg.alpha, cfg.i_target_floor)});
  }
  return points;
}

}  // namespace semnav
