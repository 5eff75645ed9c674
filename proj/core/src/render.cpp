#include "semnav/render.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>

#include <json.hpp>

namespace semnav {

using nlohmann::json;

namespace {

Vec2 vec2(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

Rgb blend(Rgb a, Rgb b, double t) {
  auto mix = [t](std::uint8_t x, std::uint8_t y) {
    return static_cast<std::uint8_t>(std::lround((1.0 - t) * x + t * y));
  };
  return {mix(a.r, b.r), mix(a.g, b.g), mix(a.b, b.b)};
}

void disk(Image& img, Pixel c, double radius, Rgb color) {
  const int r = static_cast<int>(std::ceil(radius));
  for (int dy = -r; dy <= r; ++dy) {
    for (int dx = -r; dx <= r; ++dx) {
      if (dx * dx + dy * dy <= radius * radius) img.set(c.x + dx, c.y + dy, color);
    }
  }
}

void ring(Image& img, Pixel c, double radius, Rgb color) {
  const int steps = std::max(16, static_cast<int>(8.0 * radius));
  for (int k = 0; k < steps; ++k) {
    const double a = 2.0 * 3.14159265358979323846 * k / steps;
    img.set(c.x + static_cast<int>(std::lround(radius * std::cos(a))),
            c.y + static_cast<int>(std::lround(radius * std::sin(a))), color);
  }
}

// Bresenham.
void line(Image& img, Pixel a, Pixel b, Rgb color) {
  int x = a.x, y = a.y;
  const int dx = std::abs(b.x - a.x), sx = a.x < b.x ? 1 : -1;
  const int dy = -std::abs(b.y - a.y), sy = a.y < b.y ? 1 : -1;
  int err = dx + dy;
  while (true) {
    img.set(x, y, color);
    if (x == b.x && y == b.y) break;
    const int e2 = 2 * err;
    if (e2 >= dy) { err += dy; x += sx; }
    if (e2 <= dx) { err += dx; y += sy; }
  }
}

}  // namespace

TraceReplay::TraceReplay(std::istream& in) {
  std::string text;
  int line_no = 0;
  bool have_header = false;
  while (std::getline(in, text)) {
    ++line_no;
    if (text.empty()) continue;
    json j;
    try {
      j = json::parse(text);
    } catch (const json::exception& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
    const std::string type = j.value("type", "");
    try {
      if (type == "header") {
        TruthMap m = parse_raster(j.at("map").get<std::string>());
        const Vec2 origin = j.contains("origin") ? vec2(j["origin"]) : Vec2{};
        const GridGeometry& g = m.geometry();
        map_ = TruthMap(g.width, g.height, g.cell_size, origin);
        for (std::size_t id = 0; id < g.cell_count(); ++id) map_.set_occupied(g.cell_at(id), m.occupied(g.cell_at(id)));
        region_size_ = j.at("region_size").get<double>();
        success_distance_ = j.at("success_distance").get<double>();
        if (j.contains("target") && j["target"].is_string()) target_ = j["target"].get<std::string>();
        for (const auto& o : j.at("objects")) {
          if (target_ && o.at(0).get<std::string>() == *target_) targets_.push_back({o.at(1).get<double>(), o.at(2).get<double>()});
        }
        have_header = true;
      } else if (type == "step") {
        if (!have_header) throw TraceError("trace line " + std::to_string(line_no) + ": step before header");
        Frame f;
        f.pose = vec2(j.at("pose"));
        for (const auto& id : j.at("revealed")) f.revealed.push_back(id.get<std::size_t>());
        f.states = j.value("states", "");
        if (j.contains("plan")) {
          f.planned = true;
          for (const auto& p : j.value("points", json::array())) {
            f.points.push_back({p.at(0).get<std::string>(), {p.at(1).get<double>(), p.at(2).get<double>()},
                                p.at(4).get<double>()});
          }
          for (const auto& v : j.value("viewpoints", json::array())) {
            f.viewpoints.push_back({v.at(1).get<int>(), {v.at(2).get<double>(), v.at(3).get<double>()},
                                    v.at(6).get<double>()});
          }
          for (const auto& s : j["plan"].value("route", json::array())) f.planned_route.push_back(vec2(s));
        }
        frames_.push_back(std::move(f));
      }
    } catch (const json::exception& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    } catch (const MapFormatError& e) {
      throw TraceError("trace line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  if (!have_header) throw TraceError("trace has no header record");
}

TraceReplay TraceReplay::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw TraceError("cannot open trace: " + path.string());
  return TraceReplay(in);
}

FrameState TraceReplay::state_at(int frame) const {
  if (frame < 0 || frame >= frame_count()) {
    throw TraceError("frame " + std::to_string(frame) + " out of range; valid frames are 0.." +
                     std::to_string(frame_count() - 1));
  }
  FrameState s;
  s.frame = frame;
  s.observed.assign(map_.geometry().cell_count(), 0);
  for (int k = 0; k <= frame; ++k) {
    const Frame& f = frames_[static_cast<std::size_t>(k)];
    for (const auto id : f.revealed) {
      if (id < s.observed.size()) s.observed[id] = 1;
    }
    s.route.push_back(f.pose);
    if (f.planned) {
      s.points = f.points;
      s.viewpoints = f.viewpoints;
      s.planned_route = f.planned_route;
    }
  }
  s.region_states = frames_[static_cast<std::size_t>(frame)].states;
  return s;
}

Image::Image(int width, int height, Rgb fill)
    : w_(width), h_(height), px_(static_cast<std::size_t>(width) * static_cast<std::size_t>(height), fill) {}

Rgb Image::at(int x, int y) const { return px_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)]; }

void Image::set(int x, int y, Rgb c) {
  if (x < 0 || y < 0 || x >= w_ || y >= h_) return;
  px_[static_cast<std::size_t>(y) * static_cast<std::size_t>(w_) + static_cast<std::size_t>(x)] = c;
}

void Image::write_ppm(std::ostream& out) const {
  out << "P6\n" << w_ << ' ' << h_ << "\n255\n";
  for (const Rgb& p : px_) {
    const char bytes[3] = {static_cast<char>(p.r), static_cast<char>(p.g), static_cast<char>(p.b)};
    out.write(bytes, 3);
  }
}

Pixel to_pixel(const GridGeometry& g, Vec2 p, const RenderOptions& opts) {
  const double s = opts.pixels_per_cell / g.cell_size;
  const int x = static_cast<int>(std::floor((p.x - g.origin.x) * s));
  const int y = g.height * opts.pixels_per_cell - 1 - static_cast<int>(std::floor((p.y - g.origin.y) * s));
  return {x, y};
}

Image render_frame(const TraceReplay& trace, int frame, const RenderOptions& opts) {
  const FrameState st = trace.state_at(frame);
  const GridGeometry& g = trace.map().geometry();
  const int ppc = std::max(1, opts.pixels_per_cell);
  Image img(g.width * ppc, g.height * ppc);
  const RegionLayout layout(g.bounds(), trace.region_size());

  for (std::size_t id = 0; id < g.cell_count(); ++id) {
    const CellIndex c = g.cell_at(id);
    Rgb color{110, 110, 110};
    if (st.observed[id]) color = trace.map().occupied(c) ? Rgb{25, 25, 25} : Rgb{235, 235, 235};
    const int rid = layout.region_at(g.center_of(c));
    const char state = rid >= 0 && static_cast<std::size_t>(rid) < st.region_states.size()
                           ? st.region_states[static_cast<std::size_t>(rid)]
                           : 'I';
    if (state == 'W') color = blend(color, {200, 40, 40}, 0.35);
    if (state == 'A') color = blend(color, {40, 180, 60}, 0.15);
    const Pixel p = to_pixel(g, g.center_of(c), {ppc});
    const int x0 = c.x * ppc;
    const int y0 = p.y - (p.y % ppc);
    for (int dy = 0; dy < ppc; ++dy)
      for (int dx = 0; dx < ppc; ++dx) img.set(x0 + dx, y0 + dy, color);
  }

  const Rgb grid_color{120, 120, 200};
  for (int i = 0; i <= layout.columns(); ++i) {
    const double x = g.origin.x + std::min(i * layout.region_size(), g.width * g.cell_size);
    const int px = std::min(img.width() - 1, static_cast<int>(std::lround((x - g.origin.x) / g.cell_size * ppc)));
    for (int y = 0; y < img.height(); ++y) img.set(px, y, grid_color);
  }
  for (int j = 0; j <= layout.rows(); ++j) {
    const double y = std::min(j * layout.region_size(), g.height * g.cell_size);
    const int py = std::clamp(img.height() - static_cast<int>(std::lround(y / g.cell_size * ppc)), 0, img.height() - 1);
    for (int x = 0; x < img.width(); ++x) img.set(x, py, grid_color);
  }

  for (const Vec2 t : trace.target_positions()) {
    ring(img, to_pixel(g, t, {ppc}), trace.success_distance() / g.cell_size * ppc, {0, 150, 0});
  }

  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (const auto& v : st.viewpoints) {
    lo = std::min(lo, v.s_viewpoint);
    hi = std::max(hi, v.s_viewpoint);
  }
  for (const auto& v : st.viewpoints) {
    const double t = hi > lo ? (v.s_viewpoint - lo) / (hi - lo) : 0.0;
    disk(img, to_pixel(g, v.position, {ppc}), 0.25 * ppc, blend({40, 60, 220}, {250, 220, 0}, t));
  }
  for (const auto& p : st.points) {
    const bool is_target = trace.target() && p.label == *trace.target();
    disk(img, to_pixel(g, p.position, {ppc}), (0.3 + 0.9 * p.relevance) * ppc,
         is_target ? Rgb{220, 0, 220} : Rgb{240, 130, 0});
  }
  for (std::size_t i = 1; i < st.planned_route.size(); ++i) {
    line(img, to_pixel(g, st.planned_route[i - 1], {ppc}), to_pixel(g, st.planned_route[i], {ppc}), {0, 170, 200});
  }
  for (std::size_t i = 1; i < st.route.size(); ++i) {
    line(img, to_pixel(g, st.route[i - 1], {ppc}), to_pixel(g, st.route[i], {ppc}), {210, 0, 0});
  }
  disk(img, to_pixel(g, st.route.back(), {ppc}), 0.6 * ppc, {0, 0, 200});
  return img;
}

}  // namespace semnav
