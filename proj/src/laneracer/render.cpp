#include "laneracer/render.hpp"

#include <cmath>
#include <numbers>

#include "laneracer/error.hpp"
#include "laneracer/rng.hpp"

namespace lr::sim {

double CameraConfig::focal_px() const { return 0.5 * static_cast<double>(width) / std::tan(0.5 * hfov); }

void validate_camera(const CameraConfig& camera) {
  const double p = camera.total_pitch();
  if (!(p > 0.0 && p < 0.5 * std::numbers::pi)) {
    fail(ErrorCode::invalid_argument, "camera: pitch + extra_pitch_down must lie in (0, pi/2)");
  }
  if (camera.width < 32 || camera.height_px < 24) fail(ErrorCode::invalid_argument, "camera: resolution below 32x24");
  if (!(camera.hfov > 0.0 && camera.hfov < std::numbers::pi)) fail(ErrorCode::invalid_argument, "camera: hfov out of range");
  if (!(camera.height > 0.0)) fail(ErrorCode::invalid_argument, "camera: height must be positive");
}

namespace {

struct Ray {
  double dx, dy, dz;
};

struct CameraFrame {
  double cx, cy, h;
  double fx, fy;                 // forward (horizontal)
  double rx, ry;                 // right
  double cos_p, sin_p;
  double f;
  double half_w, half_h;

  Ray ray(std::size_t col, std::size_t row) const {
    const double xn = (static_cast<double>(col) + 0.5 - half_w) / f;
    const double yn = (static_cast<double>(row) + 0.5 - half_h) / f;
    // forward' = cos p * fwd - sin p * up ; up' = sin p * fwd + cos p * up ; d = forward' + xn * right - yn * up'
    const double along = cos_p - yn * sin_p;
    return {along * fx + xn * rx, along * fy + xn * ry, -sin_p - yn * cos_p};
  }
};

CameraFrame camera_frame(const CameraConfig& camera, const CarState& state) {
  CameraFrame cf{};
  cf.fx = std::cos(state.heading);
  cf.fy = std::sin(state.heading);
  cf.rx = cf.fy;
  cf.ry = -cf.fx;
  cf.cx = state.x + camera.lateral_offset * cf.rx;
  cf.cy = state.y + camera.lateral_offset * cf.ry;
  cf.h = camera.height;
  cf.cos_p = std::cos(camera.total_pitch());
  cf.sin_p = std::sin(camera.total_pitch());
  cf.f = camera.focal_px();
  cf.half_w = 0.5 * static_cast<double>(camera.width);
  cf.half_h = 0.5 * static_cast<double>(camera.height_px);
  return cf;
}

}  // namespace

std::size_t horizon_row(const CameraConfig& camera) {
  validate_camera(camera);
  const CameraFrame cf = camera_frame(camera, CarState{});
  for (std::size_t row = 0; row < camera.height_px; ++row) {
    if (cf.ray(0, row).dz < 0.0) return row;
  }
  return camera.height_px - 1;
}

std::optional<Vec2> ground_intersection(const CameraConfig& camera, const CarState& state, std::size_t col,
                                        std::size_t row) {
  const CameraFrame cf = camera_frame(camera, state);
  const Ray d = cf.ray(col, row);
  if (!(d.dz < 0.0)) return std::nullopt;
  const double t = cf.h / -d.dz;
  return Vec2{cf.cx + t * d.dx, cf.cy + t * d.dy};
}

Renderer::Renderer(const TrackSpec& track) : geometry_(track, 0.5 * track.road_width + kWallBand) {}

ImageFrame Renderer::render(const TrackVariation& variation, const CarState& state, const CameraConfig& camera) const {
  validate_camera(camera);
  const TrackSpec& track = geometry_.track();
  const CameraFrame cf = camera_frame(camera, state);
  ImageFrame img(camera.width, camera.height_px);
  img.horizon_row = horizon_row(camera);
  const Rgb road = variation.road == RoadColor::grey ? Palette::road_grey : Palette::road_white;
  const Rgb line = variation.line == LineColor::white ? Palette::line_white : Palette::line_red;
  const bool has_line = variation.line != LineColor::none;
  const double half_line = 0.5 * track.line_width;
  const double half_road = 0.5 * track.road_width;

  for (std::size_t row = 0; row < camera.height_px; ++row) {
    for (std::size_t col = 0; col < camera.width; ++col) {
      const Ray d = cf.ray(col, row);
      Rgb c = Palette::sky;
      if (d.dz < 0.0) {
        const double t = cf.h / -d.dz;
        const double dist = geometry_.local_distance({cf.cx + t * d.dx, cf.cy + t * d.dy});
        if (has_line && dist <= half_line) {
          c = line;
        } else if (dist <= half_road) {
          c = road;
        } else if (variation.walls && dist <= half_road + kWallBand) {
          c = Palette::wall;
        } else {
          c = Palette::grass;
        }
      }
      img.set_pixel(col, row, c);
    }
  }
  return img;
}

ImageFrame render(const TrackSpec& track, const TrackVariation& variation, const CarState& state,
                  const CameraConfig& camera) {
  return Renderer(track).render(variation, state, camera);
}

ImageFrame salt_pepper(const ImageFrame& image, double p, std::uint64_t seed) {
  if (!(p >= 0.0 && p <= 1.0)) fail(ErrorCode::invalid_argument, "salt_pepper: probability must lie in [0, 1]");
  ImageFrame out = image;
  if (p == 0.0) return out;
  Rng rng(seed);
  const std::size_t n = image.width * image.height;
  for (std::size_t i = 0; i < n; ++i) {
    const bool hit = rng.uniform() < p;
    const bool white = rng.uniform() < 0.5;
    if (hit) {
      const std::uint8_t v = white ? 255 : 0;
      out.rgb[3 * i] = out.rgb[3 * i + 1] = out.rgb[3 * i + 2] = v;
    }
  }
  return out;
}

}  // namespace lr::sim
