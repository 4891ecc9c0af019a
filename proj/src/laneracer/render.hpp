#pragma once

#include <cstdint>
#include <optional>

#include "laneracer/dynamics.hpp"
#include "laneracer/track.hpp"
#include "laneracer/types.hpp"

namespace lr::sim {

struct Palette {
  static constexpr Rgb grass{0, 140, 0};
  static constexpr Rgb road_grey{60, 60, 60};
  static constexpr Rgb road_white{230, 230, 230};
  static constexpr Rgb line_red{230, 20, 20};
  static constexpr Rgb line_white{255, 255, 255};
  static constexpr Rgb wall{180, 30, 30};
  static constexpr Rgb sky{60, 60, 235};
};

inline constexpr double kWallBand = 1.5;  // metres painted beyond the road edge

struct CameraConfig {
  double height = 1.2;            // m above ground
  double pitch = 0.25;            // rad below horizontal
  double lateral_offset = 0.0;    // m, positive = right of the car axis
  double extra_pitch_down = 0.0;  // rad
  double hfov = 1.7;              // rad
  std::size_t width = 160;
  std::size_t height_px = 120;

  double total_pitch() const { return pitch + extra_pitch_down; }
  double focal_px() const;
};

void validate_camera(const CameraConfig& camera);

// First image row whose pixel-centre rays reach the ground.
std::size_t horizon_row(const CameraConfig& camera);

// Ground point seen through the centre of pixel (col, row); absent at or above the horizon.
std::optional<Vec2> ground_intersection(const CameraConfig& camera, const CarState& state, std::size_t col,
                                        std::size_t row);

// Renders through a precomputed track geometry; reuse one per episode.
class Renderer {
 public:
  explicit Renderer(const TrackSpec& track);
  ImageFrame render(const TrackVariation& variation, const CarState& state, const CameraConfig& camera) const;
  const TrackGeometry& geometry() const { return geometry_; }

 private:
  TrackGeometry geometry_;
};

ImageFrame render(const TrackSpec& track, const TrackVariation& variation, const CarState& state,
                  const CameraConfig& camera);

// Each pixel is independently replaced by black or white (equal odds) with probability p.
ImageFrame salt_pepper(const ImageFrame& image, double p, std::uint64_t seed);

}  // namespace lr::sim
