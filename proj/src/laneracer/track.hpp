#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <vector>

namespace lr::sim {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Vec2&, const Vec2&) = default;
};

enum class CircuitRole { train, test };

// Closed centerline; the segment from the last waypoint back to the first is implicit.
struct TrackSpec {
  std::string name;
  std::vector<Vec2> centerline;
  double road_width = 10.0;
  double line_width = 0.5;
  std::size_t start_index = 0;
  CircuitRole role = CircuitRole::train;
};

enum class LineColor { red, white, none };
enum class RoadColor { grey, white };

struct TrackVariation {
  LineColor line = LineColor::red;
  RoadColor road = RoadColor::grey;
  bool walls = true;

  friend bool operator==(const TrackVariation&, const TrackVariation&) = default;
};

std::string line_color_str(LineColor c);
std::string road_color_str(RoadColor c);
std::string variation_str(const TrackVariation& v);  // e.g. "red/grey/walls"

// Throws lr::Error describing the first violated invariant.
void validate_track(const TrackSpec& track);

// Minimum distance from (x, y) to the closed centerline polyline.
double distance_to_centerline(const TrackSpec& track, double x, double y);

// Normalized arc length in [0, 1) of the nearest centerline point, measured
// from start_index in waypoint order. Throws when the point is farther than
// road_width from the centerline.
double lap_progress(const TrackSpec& track, double x, double y);

// Precomputed geometry for repeated queries against one track.
class TrackGeometry {
 public:
  explicit TrackGeometry(const TrackSpec& track, double query_radius = 0.0);

  const TrackSpec& track() const { return track_; }
  double length() const { return length_; }

  struct Nearest {
    double distance = 0.0;
    double arc = 0.0;  // arc length from start_index, [0, length)
  };
  Nearest nearest(Vec2 p) const;
  double distance(Vec2 p) const { return nearest(p).distance; }
  double progress(Vec2 p) const;

  // Grid-accelerated distance that is exact whenever the true distance is
  // within the query radius given at construction; +inf otherwise.
  double local_distance(Vec2 p) const;

  Vec2 point_at(double arc) const;
  double heading_at(double arc) const;  // tangent direction in the driving direction

 private:
  TrackSpec track_;
  std::vector<double> seg_start_arc_;  // arc length from start_index at each segment's start
  double length_ = 0.0;

  double radius_ = 0.0;
  double cell_ = 1.0;
  double origin_x_ = 0.0, origin_y_ = 0.0;
  std::size_t cols_ = 0, rows_ = 0;
  std::vector<std::vector<std::size_t>> cells_;
};

// Circuit document (JSON): name, waypoints [[x, y], ...], road_width, line_width, start_index, role.
std::string track_to_json(const TrackSpec& track);
TrackSpec track_from_json(const std::string& text);
void save_track(const TrackSpec& track, const std::string& path);
TrackSpec load_track(const std::string& path);

// The seven built-in circuits; the first four are tagged train, the rest test.
std::vector<TrackSpec> builtin_circuits();
// Builtin by name, or a circuit document when `name_or_path` is not a builtin.
TrackSpec find_circuit(const std::string& name_or_path);

}  // namespace lr::sim
