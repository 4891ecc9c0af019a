#include "laneracer/conv.hpp"

#include <Eigen/Core>
#include <algorithm>
#include <cstring>

#include "laneracer/error.hpp"

namespace lr::nn {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using RowVec = Eigen::Matrix<double, 1, Eigen::Dynamic>;

}  // namespace

ConvGeometry ConvGeometry::make(const std::string& what, Dims3 in, std::size_t channels, Dims3 kernel, Dims3 stride,
                                Padding padding, const std::array<const char*, 3>& axis_names) {
  ConvGeometry g;
  g.in = in;
  g.channels = channels;
  g.kernel = kernel;
  g.stride = stride;
  for (std::size_t a = 0; a < 3; ++a) {
    if (kernel[a] == 0 || stride[a] == 0) {
      fail(ErrorCode::invalid_argument, what + ": kernel and stride must be >= 1 on " + axis_names[a]);
    }
    if (padding == Padding::valid) {
      if (kernel[a] > in[a]) {
        fail(ErrorCode::shape_mismatch, what + ": kernel " + axis_names[a] + " " + std::to_string(kernel[a]) +
                                            " exceeds input " + axis_names[a] + " " + std::to_string(in[a]) +
                                            " (valid padding)");
      }
      g.out[a] = (in[a] - kernel[a]) / stride[a] + 1;
      g.pad_before[a] = 0;
    } else {
      g.out[a] = (in[a] + stride[a] - 1) / stride[a];
      const std::size_t needed = (g.out[a] - 1) * stride[a] + kernel[a];
      const std::size_t total = needed > in[a] ? needed - in[a] : 0;
      g.pad_before[a] = total / 2;
    }
  }
  return g;
}

void im2col(const ConvGeometry& g, const double* x, double* cols) {
  const std::size_t C = g.channels;
  const auto [T, H, W] = g.in;
  const auto [kt, kh, kw] = g.kernel;
  const std::size_t patch = g.patch();
  std::size_t row = 0;
  for (std::size_t ot = 0; ot < g.out[0]; ++ot) {
    for (std::size_t oy = 0; oy < g.out[1]; ++oy) {
      for (std::size_t ox = 0; ox < g.out[2]; ++ox, ++row) {
        double* dst = cols + row * patch;
        for (std::size_t dt = 0; dt < kt; ++dt) {
          const auto t = static_cast<std::ptrdiff_t>(ot * g.stride[0] + dt) - static_cast<std::ptrdiff_t>(g.pad_before[0]);
          for (std::size_t dy = 0; dy < kh; ++dy) {
            const auto y = static_cast<std::ptrdiff_t>(oy * g.stride[1] + dy) - static_cast<std::ptrdiff_t>(g.pad_before[1]);
            const bool row_ok = t >= 0 && t < static_cast<std::ptrdiff_t>(T) && y >= 0 && y < static_cast<std::ptrdiff_t>(H);
            for (std::size_t dx = 0; dx < kw; ++dx, dst += C) {
              const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride[2] + dx) - static_cast<std::ptrdiff_t>(g.pad_before[2]);
              if (row_ok && xx >= 0 && xx < static_cast<std::ptrdiff_t>(W)) {
                const double* src = x + ((static_cast<std::size_t>(t) * H + static_cast<std::size_t>(y)) * W +
                                         static_cast<std::size_t>(xx)) * C;
                std::memcpy(dst, src, C * sizeof(double));
              } else {
                std::fill(dst, dst + C, 0.0);
              }
            }
          }
        }
      }
    }
  }
}

void col2im_add(const ConvGeometry& g, const double* cols, double* dx) {
  const std::size_t C = g.channels;
  const auto [T, H, W] = g.in;
  const auto [kt, kh, kw] = g.kernel;
  const std::size_t patch = g.patch();
  std::size_t row = 0;
  for (std::size_t ot = 0; ot < g.out[0]; ++ot) {
    for (std::size_t oy = 0; oy < g.out[1]; ++oy) {
      for (std::size_t ox = 0; ox < g.out[2]; ++ox, ++row) {
        const double* src = cols + row * patch;
        for (std::size_t dt = 0; dt < kt; ++dt) {
          const auto t = static_cast<std::ptrdiff_t>(ot * g.stride[0] + dt) - static_cast<std::ptrdiff_t>(g.pad_before[0]);
          for (std::size_t dy = 0; dy < kh; ++dy) {
            const auto y = static_cast<std::ptrdiff_t>(oy * g.stride[1] + dy) - static_cast<std::ptrdiff_t>(g.pad_before[1]);
            const bool row_ok = t >= 0 && t < static_cast<std::ptrdiff_t>(T) && y >= 0 && y < static_cast<std::ptrdiff_t>(H);
            for (std::size_t dx_ = 0; dx_ < kw; ++dx_, src += C) {
              const auto xx = static_cast<std::ptrdiff_t>(ox * g.stride[2] + dx_) - static_cast<std::ptrdiff_t>(g.pad_before[2]);
              if (row_ok && xx >= 0 && xx < static_cast<std::ptrdiff_t>(W)) {
                double* dst = dx + ((static_cast<std::size_t>(t) * H + static_cast<std::size_t>(y)) * W +
                                    static_cast<std::size_t>(xx)) * C;
                for (std::size_t c = 0; c < C; ++c) dst[c] += src[c];
              }
            }
          }
        }
      }
    }
  }
}

void conv_forward(const ConvGeometry& g, const double* x, const double* kernel, const double* bias, std::size_t filters,
                  double* y) {
  const auto P = static_cast<Eigen::Index>(g.out_positions());
  const auto K = static_cast<Eigen::Index>(g.patch());
  const auto F = static_cast<Eigen::Index>(filters);
  std::vector<double> cols(static_cast<std::size_t>(P * K));
  im2col(g, x, cols.data());
  Eigen::Map<const RowMat> A(cols.data(), P, K);
  Eigen::Map<const RowMat> B(kernel, K, F);
  Eigen::Map<RowMat> Y(y, P, F);
  Y.noalias() = A * B;
  if (bias != nullptr) {
    Eigen::Map<const RowVec> b(bias, F);
    Y.rowwise() += b;
  }
}

void conv_backward(const ConvGeometry& g, const double* x, const double* kernel, std::size_t filters, const double* dy,
                   double* dx, double* dkernel, double* dbias) {
  const auto P = static_cast<Eigen::Index>(g.out_positions());
  const auto K = static_cast<Eigen::Index>(g.patch());
  const auto F = static_cast<Eigen::Index>(filters);
  Eigen::Map<const RowMat> dY(dy, P, F);
  if (dbias != nullptr) {
    // Plain loop: Eigen's vectorised reduction order depends on pointer alignment.
    for (Eigen::Index p = 0; p < P; ++p)
      for (Eigen::Index f = 0; f < F; ++f) dbias[f] += dy[p * F + f];
  }
  if (dkernel != nullptr) {
    std::vector<double> cols(static_cast<std::size_t>(P * K));
    im2col(g, x, cols.data());
    Eigen::Map<const RowMat> A(cols.data(), P, K);
    Eigen::Map<RowMat> dK(dkernel, K, F);
    dK.noalias() += A.transpose() * dY;
  }
  if (dx != nullptr) {
    std::vector<double> dcols(static_cast<std::size_t>(P * K));
    Eigen::Map<const RowMat> B(kernel, K, F);
    Eigen::Map<RowMat> dA(dcols.data(), P, K);
    dA.noalias() = dY * B.transpose();
    col2im_add(g, dcols.data(), dx);
  }
}

PoolGeometry PoolGeometry::make(const std::string& what, Dims3 in, std::size_t channels, Dims3 window, Dims3 stride) {
  static constexpr std::array<const char*, 3> names{"time", "height", "width"};
  PoolGeometry g;
  g.in = in;
  g.channels = channels;
  g.window = window;
  g.stride = stride;
  for (std::size_t a = 0; a < 3; ++a) {
    if (window[a] == 0 || stride[a] == 0) {
      fail(ErrorCode::invalid_argument, what + ": window and stride must be >= 1 on " + names[a]);
    }
    if (window[a] > in[a]) {
      fail(ErrorCode::shape_mismatch, what + ": window " + names[a] + " " + std::to_string(window[a]) +
                                          " larger than input " + names[a] + " " + std::to_string(in[a]));
    }
    g.out[a] = (in[a] - window[a]) / stride[a] + 1;
  }
  return g;
}

void maxpool_forward(const PoolGeometry& g, const double* x, double* y, std::size_t* argmax) {
  const std::size_t C = g.channels;
  const auto [T, H, W] = g.in;
  std::size_t o = 0;
  for (std::size_t ot = 0; ot < g.out[0]; ++ot) {
    for (std::size_t oy = 0; oy < g.out[1]; ++oy) {
      for (std::size_t ox = 0; ox < g.out[2]; ++ox) {
        for (std::size_t c = 0; c < C; ++c, ++o) {
          std::size_t best_i = 0;
          double best = 0.0;
          bool first = true;
          for (std::size_t dt = 0; dt < g.window[0]; ++dt) {
            for (std::size_t dy = 0; dy < g.window[1]; ++dy) {
              for (std::size_t dx = 0; dx < g.window[2]; ++dx) {
                const std::size_t t = ot * g.stride[0] + dt;
                const std::size_t yy = oy * g.stride[1] + dy;
                const std::size_t xx = ox * g.stride[2] + dx;
                const std::size_t i = ((t * H + yy) * W + xx) * C + c;
                if (first || x[i] > best) {
                  best = x[i];
                  best_i = i;
                  first = false;
                }
              }
            }
          }
          y[o] = best;
          argmax[o] = best_i;
        }
      }
    }
  }
  (void)T;
}

void maxpool_backward(const PoolGeometry& g, const double* dy, const std::size_t* argmax, double* dx) {
  const std::size_t n = g.out[0] * g.out[1] * g.out[2] * g.channels;
  for (std::size_t o = 0; o < n; ++o) dx[argmax[o]] += dy[o];
}

}  // namespace lr::nn
