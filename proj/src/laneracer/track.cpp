#include "laneracer/track.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "laneracer/error.hpp"

namespace lr::sim {

namespace {

struct SegmentHit {
  double distance;
  double t;  // fraction along the segment
};

SegmentHit point_segment(Vec2 p, Vec2 a, Vec2 b) {
  const double dx = b.x - a.x, dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = len2 > 0.0 ? ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2 : 0.0;
  t = std::clamp(t, 0.0, 1.0);
  const double qx = a.x + t * dx - p.x, qy = a.y + t * dy - p.y;
  return {std::sqrt(qx * qx + qy * qy), t};
}

double orient(Vec2 a, Vec2 b, Vec2 c) { return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x); }

bool segments_cross(Vec2 a, Vec2 b, Vec2 c, Vec2 d) {
  const double o1 = orient(a, b, c), o2 = orient(a, b, d), o3 = orient(c, d, a), o4 = orient(c, d, b);
  return ((o1 > 0) != (o2 > 0)) && ((o3 > 0) != (o4 > 0)) && o1 != 0 && o2 != 0 && o3 != 0 && o4 != 0;
}

std::size_t segment_count(const TrackSpec& t) { return t.centerline.size(); }
Vec2 seg_a(const TrackSpec& t, std::size_t i) { return t.centerline[i]; }
Vec2 seg_b(const TrackSpec& t, std::size_t i) { return t.centerline[(i + 1) % t.centerline.size()]; }

}  // namespace

std::string line_color_str(LineColor c) {
  switch (c) {
    case LineColor::red: return "red";
    case LineColor::white: return "white";
    case LineColor::none: return "none";
  }
  return "?";
}

std::string road_color_str(RoadColor c) { return c == RoadColor::grey ? "grey" : "white"; }

std::string variation_str(const TrackVariation& v) {
  return line_color_str(v.line) + "/" + road_color_str(v.road) + "/" + (v.walls ? "walls" : "no-walls");
}

void validate_track(const TrackSpec& track) {
  const auto& c = track.centerline;
  const std::string who = "track '" + track.name + "'";
  if (c.size() < 32) fail(ErrorCode::invalid_argument, who + ": needs at least 32 waypoints, has " + std::to_string(c.size()));
  if (c.front() == c.back()) fail(ErrorCode::invalid_argument, who + ": first and last waypoint coincide (closure is implicit)");
  if (!(track.road_width > 4.0 * track.line_width) || !(track.line_width > 0.0)) {
    fail(ErrorCode::invalid_argument, who + ": road_width must exceed 4 * line_width > 0");
  }
  if (track.start_index >= c.size()) fail(ErrorCode::invalid_argument, who + ": start_index out of range");
  for (std::size_t i = 0; i < c.size(); ++i) {
    const Vec2 a = seg_a(track, i), b = seg_b(track, i);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (!(len > 0.0)) fail(ErrorCode::invalid_argument, who + ": duplicate waypoint at index " + std::to_string(i));
    if (len >= track.road_width) {
      fail(ErrorCode::invalid_argument, who + ": waypoints " + std::to_string(i) + " and " +
                                            std::to_string((i + 1) % c.size()) + " are farther apart than road_width");
    }
  }
  const std::size_t n = c.size();
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 2; j < n; ++j) {
      if (i == 0 && j == n - 1) continue;  // adjacent through the closing segment
      if (segments_cross(seg_a(track, i), seg_b(track, i), seg_a(track, j), seg_b(track, j))) {
        fail(ErrorCode::invalid_argument, who + ": centerline self-intersects (segments " + std::to_string(i) +
                                              " and " + std::to_string(j) + ")");
      }
    }
  }
}

double distance_to_centerline(const TrackSpec& track, double x, double y) {
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < segment_count(track); ++i) {
    best = std::min(best, point_segment({x, y}, seg_a(track, i), seg_b(track, i)).distance);
  }
  return best;
}

double lap_progress(const TrackSpec& track, double x, double y) { return TrackGeometry(track).progress({x, y}); }

TrackGeometry::TrackGeometry(const TrackSpec& track, double query_radius) : track_(track), radius_(query_radius) {
  validate_track(track_);
  const std::size_t n = segment_count(track_);
  std::vector<double> seg_len(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 a = seg_a(track_, i), b = seg_b(track_, i);
    seg_len[i] = std::hypot(b.x - a.x, b.y - a.y);
    length_ += seg_len[i];
  }
  seg_start_arc_.assign(n, 0.0);
  double arc = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (track_.start_index + k) % n;
    seg_start_arc_[i] = arc;
    arc += seg_len[i];
  }

  if (radius_ > 0.0) {
    cell_ = radius_;
    double min_x = track_.centerline[0].x, max_x = min_x, min_y = track_.centerline[0].y, max_y = min_y;
    for (const auto& p : track_.centerline) {
      min_x = std::min(min_x, p.x);
      max_x = std::max(max_x, p.x);
      min_y = std::min(min_y, p.y);
      max_y = std::max(max_y, p.y);
    }
    origin_x_ = min_x - cell_;
    origin_y_ = min_y - cell_;
    cols_ = static_cast<std::size_t>((max_x - origin_x_) / cell_) + 2;
    rows_ = static_cast<std::size_t>((max_y - origin_y_) / cell_) + 2;
    cells_.assign(cols_ * rows_, {});
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = seg_a(track_, i), b = seg_b(track_, i);
      const auto c0 = static_cast<std::size_t>((std::min(a.x, b.x) - origin_x_) / cell_);
      const auto c1 = static_cast<std::size_t>((std::max(a.x, b.x) - origin_x_) / cell_);
      const auto r0 = static_cast<std::size_t>((std::min(a.y, b.y) - origin_y_) / cell_);
      const auto r1 = static_cast<std::size_t>((std::max(a.y, b.y) - origin_y_) / cell_);
      for (std::size_t r = r0; r <= r1; ++r)
        for (std::size_t c = c0; c <= c1; ++c) cells_[r * cols_ + c].push_back(i);
    }
  }
}

TrackGeometry::Nearest TrackGeometry::nearest(Vec2 p) const {
  Nearest best{std::numeric_limits<double>::infinity(), 0.0};
  std::size_t best_seg = 0;
  double best_t = 0.0;
  for (std::size_t i = 0; i < segment_count(track_); ++i) {
    const auto hit = point_segment(p, seg_a(track_, i), seg_b(track_, i));
    if (hit.distance < best.distance) {
      best.distance = hit.distance;
      best_seg = i;
      best_t = hit.t;
    }
  }
  const Vec2 a = seg_a(track_, best_seg), b = seg_b(track_, best_seg);
  best.arc = seg_start_arc_[best_seg] + best_t * std::hypot(b.x - a.x, b.y - a.y);
  if (best.arc >= length_ * (1.0 - 1e-12)) best.arc = std::max(0.0, best.arc - length_);
  return best;
}

double TrackGeometry::progress(Vec2 p) const {
  const auto n = nearest(p);
  if (n.distance > track_.road_width) {
    fail(ErrorCode::invalid_argument, "lap_progress: point is " + std::to_string(n.distance) +
                                          " m from the centerline of '" + track_.name + "' (off track)");
  }
  const double f = n.arc / length_;
  return f >= 1.0 ? 0.0 : f;
}

double TrackGeometry::local_distance(Vec2 p) const {
  constexpr double inf = std::numeric_limits<double>::infinity();
  if (radius_ <= 0.0) return distance(p);
  const double fx = (p.x - origin_x_) / cell_, fy = (p.y - origin_y_) / cell_;
  if (fx < 0.0 || fy < 0.0) return inf;
  const auto cx = static_cast<std::size_t>(fx), cy = static_cast<std::size_t>(fy);
  if (cx >= cols_ || cy >= rows_) return inf;
  double best = inf;
  for (std::size_t r = cy > 0 ? cy - 1 : 0; r <= std::min(cy + 1, rows_ - 1); ++r) {
    for (std::size_t c = cx > 0 ? cx - 1 : 0; c <= std::min(cx + 1, cols_ - 1); ++c) {
      for (std::size_t i : cells_[r * cols_ + c]) {
        best = std::min(best, point_segment(p, seg_a(track_, i), seg_b(track_, i)).distance);
      }
    }
  }
  return best <= radius_ ? best : inf;
}

Vec2 TrackGeometry::point_at(double arc) const {
  const std::size_t n = segment_count(track_);
  arc = std::fmod(arc, length_);
  if (arc < 0) arc += length_;
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t i = (track_.start_index + k) % n;
    const Vec2 a = seg_a(track_, i), b = seg_b(track_, i);
    const double len = std::hypot(b.x - a.x, b.y - a.y);
    if (arc <= seg_start_arc_[i] + len || k + 1 == n) {
      const double t = std::clamp((arc - seg_start_arc_[i]) / len, 0.0, 1.0);
      return {a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
    }
  }
  return track_.centerline[track_.start_index];
}

double TrackGeometry::heading_at(double arc) const {
  const Vec2 a = point_at(arc - 0.5), b = point_at(arc + 0.5);
  return std::atan2(b.y - a.y, b.x - a.x);
}

std::string track_to_json(const TrackSpec& track) {
  nlohmann::ordered_json j;
  j["name"] = track.name;
  j["role"] = track.role == CircuitRole::train ? "train" : "test";
  j["road_width"] = track.road_width;
  j["line_width"] = track.line_width;
  j["start_index"] = track.start_index;
  auto pts = nlohmann::json::array();
  for (const auto& p : track.centerline) pts.push_back({p.x, p.y});
  j["waypoints"] = std::move(pts);
  return j.dump(1) + "\n";
}

TrackSpec track_from_json(const std::string& text) {
  TrackSpec t;
  try {
    const auto j = nlohmann::json::parse(text);
    t.name = j.at("name").get<std::string>();
    t.road_width = j.value("road_width", 10.0);
    t.line_width = j.value("line_width", 0.5);
    t.start_index = j.value("start_index", std::size_t{0});
    t.role = j.value("role", std::string("test")) == "train" ? CircuitRole::train : CircuitRole::test;
    for (const auto& p : j.at("waypoints")) t.centerline.push_back({p.at(0).get<double>(), p.at(1).get<double>()});
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::format, std::string("circuit document: ") + e.what());
  }
  validate_track(t);
  return t;
}

void save_track(const TrackSpec& track, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorCode::io, "cannot open '" + path + "' for writing");
  out << track_to_json(track);
}

TrackSpec load_track(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorCode::io, "cannot open circuit file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return track_from_json(ss.str());
}

TrackSpec find_circuit(const std::string& name_or_path) {
  for (auto& t : builtin_circuits()) {
    if (t.name == name_or_path) return t;
  }
  std::ifstream probe(name_or_path);
  if (!probe) fail(ErrorCode::invalid_argument, "unknown circuit '" + name_or_path + "' (not a builtin name or file)");
  return load_track(name_or_path);
}

}  // namespace lr::sim
