#include <algorithm>
#include <cmath>

#include "laneracer/error.hpp"
#include "laneracer/models.hpp"

namespace lr::models {

nn::Tensor preprocess(const ImageFrame& image, const PreprocessSpec& spec) {
  if (image.rgb.size() != 3 * image.width * image.height) {
    fail(ErrorCode::shape_mismatch, "preprocess: image byte length does not match its dimensions");
  }
  if (spec.height == 0 || spec.width == 0) fail(ErrorCode::invalid_argument, "preprocess: empty target size");
  if (spec.horizon_row >= image.height || image.width == 0) {
    fail(ErrorCode::invalid_argument, "preprocess: horizon row " + std::to_string(spec.horizon_row) +
                                          " leaves an empty crop of a " + std::to_string(image.height) +
                                          "-row image");
  }
  const std::size_t src_h = image.height - spec.horizon_row;
  const std::size_t src_w = image.width;
  const std::uint8_t* src = image.rgb.data() + 3 * spec.horizon_row * src_w;
  const double sy = static_cast<double>(src_h) / static_cast<double>(spec.height);
  const double sx = static_cast<double>(src_w) / static_cast<double>(spec.width);

  nn::Tensor out({spec.height, spec.width, 3});
  for (std::size_t y = 0; y < spec.height; ++y) {
    const double fy = std::clamp((static_cast<double>(y) + 0.5) * sy - 0.5, 0.0, static_cast<double>(src_h - 1));
    const auto y0 = static_cast<std::size_t>(fy);
    const std::size_t y1 = std::min(y0 + 1, src_h - 1);
    const double ay = fy - static_cast<double>(y0);
    for (std::size_t x = 0; x < spec.width; ++x) {
      const double fx = std::clamp((static_cast<double>(x) + 0.5) * sx - 0.5, 0.0, static_cast<double>(src_w - 1));
      const auto x0 = static_cast<std::size_t>(fx);
      const std::size_t x1 = std::min(x0 + 1, src_w - 1);
      const double ax = fx - static_cast<double>(x0);
      for (std::size_t c = 0; c < 3; ++c) {
        const double p00 = src[3 * (y0 * src_w + x0) + c];
        const double p01 = src[3 * (y0 * src_w + x1) + c];
        const double p10 = src[3 * (y1 * src_w + x0) + c];
        const double p11 = src[3 * (y1 * src_w + x1) + c];
        const double top = p00 + (p01 - p00) * ax;
        const double bottom = p10 + (p11 - p10) * ax;
        out[(y * spec.width + x) * 3 + c] = (top + (bottom - top) * ay) / 255.0;
      }
    }
  }
  return out;
}

}  // namespace lr::models
