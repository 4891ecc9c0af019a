#pragma once

// Shared spatio-temporal kernels behind conv2d/conv3d/convlstm2d/pooling.
// Activations are laid out [T, H, W, C] row-major; a 2-D image is T = 1.

#include <array>
#include <cstddef>
#include <string>
#include <vector>

namespace lr::nn {

enum class Padding { valid, same };

using Dims3 = std::array<std::size_t, 3>;

struct ConvGeometry {
  Dims3 in{};
  std::size_t channels = 0;
  Dims3 kernel{};
  Dims3 stride{};
  Dims3 out{};
  Dims3 pad_before{};

  // `what` names the calling op in error messages; `axis_names` the three axes.
  static ConvGeometry make(const std::string& what, Dims3 in, std::size_t channels, Dims3 kernel, Dims3 stride,
                           Padding padding, const std::array<const char*, 3>& axis_names = {"time", "height", "width"});

  std::size_t in_positions() const { return in[0] * in[1] * in[2]; }
  std::size_t out_positions() const { return out[0] * out[1] * out[2]; }
  std::size_t patch() const { return kernel[0] * kernel[1] * kernel[2] * channels; }
};

// cols is [out_positions, patch]; zero padding outside the input.
void im2col(const ConvGeometry& g, const double* x, double* cols);
void col2im_add(const ConvGeometry& g, const double* cols, double* dx);

// y[out_positions, filters] = im2col(x) * kernel[patch, filters] + bias.
void conv_forward(const ConvGeometry& g, const double* x, const double* kernel, const double* bias, std::size_t filters,
                  double* y);

// Accumulates (+=) into dx, dkernel and dbias. Any of them may be null.
void conv_backward(const ConvGeometry& g, const double* x, const double* kernel, std::size_t filters, const double* dy,
                   double* dx, double* dkernel, double* dbias);

struct PoolGeometry {
  Dims3 in{};
  std::size_t channels = 0;
  Dims3 window{};
  Dims3 stride{};
  Dims3 out{};

  static PoolGeometry make(const std::string& what, Dims3 in, std::size_t channels, Dims3 window, Dims3 stride);
};

// Writes y and the flat input index of each maximum (first one on ties).
void maxpool_forward(const PoolGeometry& g, const double* x, double* y, std::size_t* argmax);
void maxpool_backward(const PoolGeometry& g, const double* dy, const std::size_t* argmax, double* dx);

}  // namespace lr::nn
