#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace lr {

// Output contract of every brain.
struct DriveCommand {
  double v = 0.0;  // linear speed, m/s
  double w = 0.0;  // angular speed, rad/s (counter-clockwise positive)

  friend bool operator==(const DriveCommand&, const DriveCommand&) = default;
};

struct SpeedLimits {
  double v_max = 12.0;
  double w_max = 3.0;
};

struct Rgb {
  std::uint8_t r = 0, g = 0, b = 0;
  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Raw RGB camera image as produced by the renderer.
struct ImageFrame {
  std::size_t width = 0;
  std::size_t height = 0;
  std::vector<std::uint8_t> rgb;  // 3 * width * height, row-major
  std::size_t horizon_row = 0;    // first row whose pixel rays hit the ground

  ImageFrame() = default;
  ImageFrame(std::size_t w, std::size_t h) : width(w), height(h), rgb(3 * w * h, 0) {}

  Rgb pixel(std::size_t x, std::size_t y) const {
    const std::size_t i = 3 * (y * width + x);
    return {rgb[i], rgb[i + 1], rgb[i + 2]};
  }
  void set_pixel(std::size_t x, std::size_t y, Rgb c) {
    const std::size_t i = 3 * (y * width + x);
    rgb[i] = c.r;
    rgb[i + 1] = c.g;
    rgb[i + 2] = c.b;
  }

  friend bool operator==(const ImageFrame&, const ImageFrame&) = default;
};

}  // namespace lr
