#include "semnav/coverage_memory.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semnav {

void FovModel::validate() const {
  if (!(radius > 0.0)) throw std::invalid_argument("fov radius must be > 0");
  if (!(angle > 0.0 && angle <= 2.0 * std::numbers::pi + 1e-12)) {
    throw std::invalid_argument("fov angle must be in (0, 2*pi]");
  }
  if (min_displacement < 0.0) throw std::invalid_argument("fov min_displacement must be >= 0");
}

void CoverageConfig::validate() const {
  if (bitmap_n < 1) throw std::invalid_argument("coverage.bitmap_n must be >= 1");
  if (!(tau >= 0.0 && tau <= 1.0)) throw std::invalid_argument("coverage.tau must be in [0, 1]");
  fov.validate();
}

double estimate_heading(Vec2 prev, Vec2 curr, double prev_heading, double min_displacement) {
  const Vec2 d = curr - prev;
  if (d.norm() < min_displacement || (d.x == 0.0 && d.y == 0.0)) {
    return prev_heading;
  }
  return wrap_angle(std::atan2(d.y, d.x));
}

bool visible(Vec2 g, Vec2 pose, double heading, const FovModel& fov) {
  const Vec2 d = g - pose;
  const double dist2 = d.squared_norm();
  if (dist2 > fov.radius * fov.radius) {
    return false;
  }
  if (dist2 == 0.0 || fov.angle >= 2.0 * std::numbers::pi) {
    return true;
  }
  return angle_between(std::atan2(d.y, d.x), heading) <= 0.5 * fov.angle;
}

RegionMemory::RegionMemory(int n) : n_(n) {
  if (n < 1) throw std::invalid_argument("bitmap size must be >= 1");
  bits_.assign(static_cast<std::size_t>(n) * static_cast<std::size_t>(n), 0);
}

bool RegionMemory::mark(int i, int j) {
  auto& b = bits_[index(i, j)];
  if (b) return false;
  b = 1;
  ++seen_count_;
  return true;
}

void RegionMemory::reset() {
  std::fill(bits_.begin(), bits_.end(), 0);
  seen_count_ = 0;
}

double coverage_ratio(const RegionMemory& memory) {
  return static_cast<double>(memory.seen_count()) / static_cast<double>(memory.n() * memory.n());
}

Vec2 bitmap_cell_center(const SubRegion& region, int n, int i, int j) {
  const Rect& b = region.bounds;
  return {b.min_x + (i + 0.5) * b.width() / n, b.min_y + (j + 0.5) * b.height() / n};
}

CoverageMemory::CoverageMemory(std::vector<SubRegion> regions, CoverageConfig cfg,
                               std::shared_ptr<const TruthMap> truth)
    : regions_(std::move(regions)), cfg_(cfg), truth_(std::move(truth)) {
  cfg_.validate();
  if (cfg_.occlusion_aware && !truth_) {
    throw std::invalid_argument("occlusion-aware coverage needs a truth map");
  }
  memories_.assign(regions_.size(), RegionMemory(cfg_.bitmap_n));
}

std::size_t CoverageMemory::accumulate(int region_id, Vec2 pose, double heading) {
  const auto idx = static_cast<std::size_t>(region_id);
  const SubRegion& region = regions_.at(idx);
  RegionMemory& mem = memories_.at(idx);
  std::size_t flips = 0;
  const int n = mem.n();
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i < n; ++i) {
      if (mem.seen(i, j)) continue;
      const Vec2 g = bitmap_cell_center(region, n, i, j);
      if (!visible(g, pose, heading, cfg_.fov)) continue;
      if (cfg_.occlusion_aware && !line_of_sight(*truth_, pose, g)) continue;
      if (mem.mark(i, j)) ++flips;
    }
  }
  return flips;
}

std::vector<StateChange> CoverageMemory::on_region_transition(int leaving, int entering, Vec2 pose,
                                                              double heading) {
  std::vector<StateChange> changes;
  if (leaving == entering) {
    return changes;
  }
  if (leaving >= 0) {
    RegionMemory& left = memories_.at(static_cast<std::size_t>(leaving));
    if (left.state != RegionState::Worthless && coverage_ratio(left) >= cfg_.tau) {
      changes.push_back({leaving, left.state, RegionState::Worthless});
      left.state = RegionState::Worthless;
    }
  }
  if (entering >= 0) {
    RegionMemory& entered = memories_.at(static_cast<std::size_t>(entering));
    if (entered.state != RegionState::Worthless) {
      if (entered.state != RegionState::Active) {
        changes.push_back({entering, entered.state, RegionState::Active});
      }
      entered.state = RegionState::Active;
      entered.reset();
      accumulate(entering, pose, heading);
    }
  }
  return changes;
}

std::vector<RegionState> CoverageMemory::states() const {
  std::vector<RegionState> out;
  out.reserve(memories_.size());
  for (const auto& m : memories_) out.push_back(m.state);
  return out;
}

}  // namespace semnav
