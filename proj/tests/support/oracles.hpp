#pragma once

// Independent reference implementations used only by tests. They are written
// directly from the textbook definitions with plain nested loops and share no
// code with the library's im2col/GEMM path.

#include <cmath>
#include <vector>

#include "laneracer/tensor.hpp"

namespace oracle {

using lr::nn::Tensor;

inline long same_pad_before(long in, long k, long s) {
  const long out = (in + s - 1) / s;
  const long total = std::max((out - 1) * s + k - in, 0L);
  return total / 2;
}

inline long out_dim(long in, long k, long s, bool same) { return same ? (in + s - 1) / s : (in - k) / s + 1; }

inline Tensor conv2d(const Tensor& x, const Tensor& k, const Tensor& b, long sh, long sw, bool same) {
  const long H = x.dim(0), W = x.dim(1), C = x.dim(2);
  const long KH = k.dim(0), KW = k.dim(1), F = k.dim(3);
  const long OH = out_dim(H, KH, sh, same), OW = out_dim(W, KW, sw, same);
  const long ph = same ? same_pad_before(H, KH, sh) : 0, pw = same ? same_pad_before(W, KW, sw) : 0;
  Tensor y({std::size_t(OH), std::size_t(OW), std::size_t(F)});
  for (long oy = 0; oy < OH; ++oy)
    for (long ox = 0; ox < OW; ++ox)
      for (long f = 0; f < F; ++f) {
        double s = b[f];
        for (long dy = 0; dy < KH; ++dy)
          for (long dx = 0; dx < KW; ++dx)
            for (long c = 0; c < C; ++c) {
              const long iy = oy * sh + dy - ph, ix = ox * sw + dx - pw;
              if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
              s += x[(iy * W + ix) * C + c] * k[((dy * KW + dx) * C + c) * F + f];
            }
        y[(oy * OW + ox) * F + f] = s;
      }
  return y;
}

inline Tensor conv3d(const Tensor& x, const Tensor& k, const Tensor& b, long st, long sh, long sw, bool same) {
  const long T = x.dim(0), H = x.dim(1), W = x.dim(2), C = x.dim(3);
  const long KT = k.dim(0), KH = k.dim(1), KW = k.dim(2), F = k.dim(4);
  const long OT = out_dim(T, KT, st, same), OH = out_dim(H, KH, sh, same), OW = out_dim(W, KW, sw, same);
  const long pt = same ? same_pad_before(T, KT, st) : 0, ph = same ? same_pad_before(H, KH, sh) : 0,
             pw = same ? same_pad_before(W, KW, sw) : 0;
  Tensor y({std::size_t(OT), std::size_t(OH), std::size_t(OW), std::size_t(F)});
  for (long ot = 0; ot < OT; ++ot)
    for (long oy = 0; oy < OH; ++oy)
      for (long ox = 0; ox < OW; ++ox)
        for (long f = 0; f < F; ++f) {
          double s = b[f];
          for (long dt = 0; dt < KT; ++dt)
            for (long dy = 0; dy < KH; ++dy)
              for (long dx = 0; dx < KW; ++dx)
                for (long c = 0; c < C; ++c) {
                  const long it = ot * st + dt - pt, iy = oy * sh + dy - ph, ix = ox * sw + dx - pw;
                  if (it < 0 || it >= T || iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
                  s += x[((it * H + iy) * W + ix) * C + c] * k[(((dt * KH + dy) * KW + dx) * C + c) * F + f];
                }
          y[((ot * OH + oy) * OW + ox) * F + f] = s;
        }
  return y;
}

inline Tensor dense(const Tensor& x, const Tensor& w, const Tensor& b) {
  const long n = w.dim(0), m = w.dim(1);
  Tensor y({std::size_t(m)});
  for (long j = 0; j < m; ++j) {
    double s = b[j];
    for (long i = 0; i < n; ++i) s += x[i] * w[i * m + j];
    y[j] = s;
  }
  return y;
}

inline double sig(double v) { return 1.0 / (1.0 + std::exp(-v)); }

// One ConvLSTM step transcribed gate by gate:
//   i = sig(Wxi*x + Whi*h + bi), f = sig(...), g = tanh(...), o = sig(...)
//   c' = f.c + i.g, h' = o.tanh(c')
// Each gate convolution is evaluated separately with "same" padding.
inline void convlstm_step(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& wx, const Tensor& wh,
                          const Tensor& b, Tensor& h_out, Tensor& c_out) {
  const long H = x.dim(0), W = x.dim(1), Cin = x.dim(2);
  const long KH = wx.dim(0), KW = wx.dim(1), F = h.dim(2);
  const long ph = same_pad_before(H, KH, 1), pw = same_pad_before(W, KW, 1);
  auto gate_pre = [&](long gate, long y, long xx, long f) {
    const long col = gate * F + f;
    double s = b[col];
    for (long dy = 0; dy < KH; ++dy)
      for (long dx = 0; dx < KW; ++dx) {
        const long iy = y + dy - ph, ix = xx + dx - pw;
        if (iy < 0 || iy >= H || ix < 0 || ix >= W) continue;
        for (long ci = 0; ci < Cin; ++ci) s += x[(iy * W + ix) * Cin + ci] * wx[((dy * KW + dx) * Cin + ci) * 4 * F + col];
        for (long ch = 0; ch < F; ++ch) s += h[(iy * W + ix) * F + ch] * wh[((dy * KW + dx) * F + ch) * 4 * F + col];
      }
    return s;
  };
  h_out = Tensor({std::size_t(H), std::size_t(W), std::size_t(F)});
  c_out = Tensor({std::size_t(H), std::size_t(W), std::size_t(F)});
  for (long y = 0; y < H; ++y)
    for (long xx = 0; xx < W; ++xx)
      for (long f = 0; f < F; ++f) {
        const double ig = sig(gate_pre(0, y, xx, f));
        const double fg = sig(gate_pre(1, y, xx, f));
        const double gg = std::tanh(gate_pre(2, y, xx, f));
        const double og = sig(gate_pre(3, y, xx, f));
        const long s = (y * W + xx) * F + f;
        c_out[s] = fg * c[s] + ig * gg;
        h_out[s] = og * std::tanh(c_out[s]);
      }
}

}  // namespace oracle
