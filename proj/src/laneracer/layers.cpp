#include "laneracer/layers.hpp"

#include <algorithm>
#include <cmath>

#include "laneracer/error.hpp"

namespace lr::nn {

namespace {

void require_rank(const char* what, const char* arg, const Tensor& t, std::size_t rank) {
  if (t.rank() != rank) {
    fail(ErrorCode::shape_mismatch, std::string(what) + ": " + arg + " must have rank " + std::to_string(rank) +
                                        ", got " + shape_str(t.shape()));
  }
}

void require_dim(const char* what, const char* label, std::size_t got, std::size_t want) {
  if (got != want) {
    fail(ErrorCode::shape_mismatch, std::string(what) + ": " + label + " is " + std::to_string(got) + ", expected " +
                                        std::to_string(want));
  }
}

struct LstmGeometry {
  std::size_t H, W, Cin, F;
  ConvGeometry input;
  ConvGeometry recurrent;
};

LstmGeometry lstm_geometry(const char* what, std::size_t H, std::size_t W, std::size_t Cin,
                           const ConvLstmWeights& w) {
  require_rank(what, "kernel", w.kernel, 4);
  require_rank(what, "recurrent_kernel", w.recurrent_kernel, 4);
  require_rank(what, "bias", w.bias, 1);
  const std::size_t gates = w.kernel.dim(3);
  if (gates % 4 != 0) fail(ErrorCode::shape_mismatch, std::string(what) + ": gate channels not divisible by 4");
  const std::size_t F = gates / 4;
  require_dim(what, "kernel input channels", w.kernel.dim(2), Cin);
  require_dim(what, "recurrent_kernel height", w.recurrent_kernel.dim(0), w.kernel.dim(0));
  require_dim(what, "recurrent_kernel width", w.recurrent_kernel.dim(1), w.kernel.dim(1));
  require_dim(what, "recurrent_kernel input channels", w.recurrent_kernel.dim(2), F);
  require_dim(what, "recurrent_kernel gate channels", w.recurrent_kernel.dim(3), gates);
  require_dim(what, "bias length", w.bias.dim(0), gates);
  const Dims3 k{1, w.kernel.dim(0), w.kernel.dim(1)};
  return LstmGeometry{H,
                      W,
                      Cin,
                      F,
                      ConvGeometry::make(what, {1, H, W}, Cin, k, {1, 1, 1}, Padding::same),
                      ConvGeometry::make(what, {1, H, W}, F, k, {1, 1, 1}, Padding::same)};
}

// z holds pre-activations [HW, 4F]; converts in place to gate activations
// and writes the new cell and hidden state.
void lstm_cell(std::size_t positions, std::size_t F, double* z, const double* c_prev, double* c, double* h) {
  for (std::size_t p = 0; p < positions; ++p) {
    double* zp = z + p * 4 * F;
    for (std::size_t k = 0; k < F; ++k) {
      const double i = sigmoid(zp[k]);
      const double f = sigmoid(zp[F + k]);
      const double g = std::tanh(zp[2 * F + k]);
      const double o = sigmoid(zp[3 * F + k]);
      zp[k] = i;
      zp[F + k] = f;
      zp[2 * F + k] = g;
      zp[3 * F + k] = o;
      const double cp = c_prev ? c_prev[p * F + k] : 0.0;
      const double cn = f * cp + i * g;
      c[p * F + k] = cn;
      h[p * F + k] = o * std::tanh(cn);
    }
  }
}

}  // namespace

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

Tensor conv2d(const Tensor& x, const Tensor& kernel, const Tensor& bias, std::array<std::size_t, 2> stride,
              Padding padding) {
  constexpr const char* what = "conv2d";
  require_rank(what, "input", x, 3);
  require_rank(what, "kernel", kernel, 4);
  require_rank(what, "bias", bias, 1);
  require_dim(what, "kernel input channels", kernel.dim(2), x.dim(2));
  require_dim(what, "bias length", bias.dim(0), kernel.dim(3));
  const auto g = ConvGeometry::make(what, {1, x.dim(0), x.dim(1)}, x.dim(2), {1, kernel.dim(0), kernel.dim(1)},
                                    {1, stride[0], stride[1]}, padding);
  Tensor y({g.out[1], g.out[2], kernel.dim(3)});
  conv_forward(g, x.ptr(), kernel.ptr(), bias.ptr(), kernel.dim(3), y.ptr());
  return y;
}

Tensor conv3d(const Tensor& x, const Tensor& kernel, const Tensor& bias, Dims3 stride, Padding padding) {
  constexpr const char* what = "conv3d";
  require_rank(what, "input", x, 4);
  require_rank(what, "kernel", kernel, 5);
  require_rank(what, "bias", bias, 1);
  require_dim(what, "kernel input channels", kernel.dim(3), x.dim(3));
  require_dim(what, "bias length", bias.dim(0), kernel.dim(4));
  const auto g = ConvGeometry::make(what, {x.dim(0), x.dim(1), x.dim(2)}, x.dim(3),
                                    {kernel.dim(0), kernel.dim(1), kernel.dim(2)}, stride, padding);
  Tensor y({g.out[0], g.out[1], g.out[2], kernel.dim(4)});
  conv_forward(g, x.ptr(), kernel.ptr(), bias.ptr(), kernel.dim(4), y.ptr());
  return y;
}

Tensor dense(const Tensor& x, const Tensor& weight, const Tensor& bias) {
  constexpr const char* what = "dense";
  require_rank(what, "input", x, 1);
  require_rank(what, "weight", weight, 2);
  require_rank(what, "bias", bias, 1);
  require_dim(what, "weight rows", weight.dim(0), x.dim(0));
  require_dim(what, "bias length", bias.dim(0), weight.dim(1));
  const std::size_t n = weight.dim(0);
  const std::size_t m = weight.dim(1);
  Tensor y({m}, bias.values());
  // Row-major weight: accumulate x[i] * W[i, :] in input order.
  for (std::size_t i = 0; i < n; ++i) {
    const double xi = x[i];
    const double* row = weight.ptr() + i * m;
    for (std::size_t j = 0; j < m; ++j) y[j] += xi * row[j];
  }
  return y;
}

Tensor relu(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = v > 0.0 ? v : 0.0;
  return y;
}

Tensor tanh(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = std::tanh(v);
  return y;
}

Tensor sigmoid(const Tensor& x) {
  Tensor y = x;
  for (auto& v : y.data()) v = sigmoid(v);
  return y;
}

Tensor maxpool2d(const Tensor& x, std::array<std::size_t, 2> window, std::array<std::size_t, 2> stride) {
  require_rank("maxpool2d", "input", x, 3);
  const auto g = PoolGeometry::make("maxpool2d", {1, x.dim(0), x.dim(1)}, x.dim(2), {1, window[0], window[1]},
                                    {1, stride[0], stride[1]});
  Tensor y({g.out[1], g.out[2], x.dim(2)});
  std::vector<std::size_t> argmax(y.size());
  maxpool_forward(g, x.ptr(), y.ptr(), argmax.data());
  return y;
}

Tensor maxpool3d(const Tensor& x, Dims3 window, Dims3 stride) {
  require_rank("maxpool3d", "input", x, 4);
  const auto g = PoolGeometry::make("maxpool3d", {x.dim(0), x.dim(1), x.dim(2)}, x.dim(3), window, stride);
  Tensor y({g.out[0], g.out[1], g.out[2], x.dim(3)});
  std::vector<std::size_t> argmax(y.size());
  maxpool_forward(g, x.ptr(), y.ptr(), argmax.data());
  return y;
}

double mse_loss(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    fail(ErrorCode::shape_mismatch, "mse_loss: prediction " + shape_str(pred.shape()) + " vs target " +
                                        shape_str(target.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    s += d * d;
  }
  return s / static_cast<double>(pred.size());
}

double mae_metric(const Tensor& pred, const Tensor& target) {
  if (pred.shape() != target.shape()) {
    fail(ErrorCode::shape_mismatch, "mae_metric: prediction " + shape_str(pred.shape()) + " vs target " +
                                        shape_str(target.shape()));
  }
  double s = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) s += std::abs(pred[i] - target[i]);
  return s / static_cast<double>(pred.size());
}

LstmState convlstm2d_step(const Tensor& x, const LstmState& prev, const ConvLstmWeights& weights) {
  constexpr const char* what = "convlstm2d";
  require_rank(what, "input", x, 3);
  require_rank(what, "h_prev", prev.h, 3);
  require_rank(what, "c_prev", prev.c, 3);
  const auto lg = lstm_geometry(what, x.dim(0), x.dim(1), x.dim(2), weights);
  for (std::size_t a = 0; a < 2; ++a) {
    const char* axis = a == 0 ? "height" : "width";
    if (prev.h.dim(a) != x.dim(a) || prev.c.dim(a) != x.dim(a)) {
      fail(ErrorCode::shape_mismatch, std::string(what) + ": state " + axis + " does not match input " + axis + " " +
                                          std::to_string(x.dim(a)));
    }
  }
  require_dim(what, "h_prev channels", prev.h.dim(2), lg.F);
  require_dim(what, "c_prev channels", prev.c.dim(2), lg.F);

  const std::size_t P = lg.H * lg.W;
  std::vector<double> z(P * 4 * lg.F);
  std::vector<double> zh(P * 4 * lg.F);
  conv_forward(lg.input, x.ptr(), weights.kernel.ptr(), weights.bias.ptr(), 4 * lg.F, z.data());
  conv_forward(lg.recurrent, prev.h.ptr(), weights.recurrent_kernel.ptr(), nullptr, 4 * lg.F, zh.data());
  for (std::size_t i = 0; i < z.size(); ++i) z[i] += zh[i];
  LstmState next{Tensor({lg.H, lg.W, lg.F}), Tensor({lg.H, lg.W, lg.F})};
  lstm_cell(P, lg.F, z.data(), prev.c.ptr(), next.c.ptr(), next.h.ptr());
  return next;
}

Tensor convlstm2d_sequence(const Tensor& x, const ConvLstmWeights& weights, ConvLstmTrace* trace) {
  constexpr const char* what = "convlstm2d";
  require_rank(what, "input sequence", x, 4);
  const std::size_t T = x.dim(0);
  const auto lg = lstm_geometry(what, x.dim(1), x.dim(2), x.dim(3), weights);
  const std::size_t P = lg.H * lg.W;
  const std::size_t G = 4 * lg.F;
  const std::size_t state = P * lg.F;

  // Input contributions for every step at once: a conv3d with temporal kernel 1.
  const auto gx = ConvGeometry::make(what, {T, lg.H, lg.W}, lg.Cin, {1, weights.kernel.dim(0), weights.kernel.dim(1)},
                                     {1, 1, 1}, Padding::same);
  std::vector<double> zx(T * P * G);
  conv_forward(gx, x.ptr(), weights.kernel.ptr(), weights.bias.ptr(), G, zx.data());

  Tensor hs({T, lg.H, lg.W, lg.F});
  std::vector<double> h_prev(state, 0.0), c_prev(state, 0.0), c(state), zh(P * G);
  if (trace) {
    trace->gates.assign(T, {});
    trace->c.assign(T, {});
    trace->h.assign(T, {});
  }
  for (std::size_t t = 0; t < T; ++t) {
    double* z = zx.data() + t * P * G;
    if (t > 0) {
      conv_forward(lg.recurrent, h_prev.data(), weights.recurrent_kernel.ptr(), nullptr, G, zh.data());
      for (std::size_t i = 0; i < P * G; ++i) z[i] += zh[i];
    }
    double* h = hs.ptr() + t * state;
    lstm_cell(P, lg.F, z, t > 0 ? c_prev.data() : nullptr, c.data(), h);
    if (trace) {
      trace->gates[t].assign(z, z + P * G);
      trace->c[t] = c;
      trace->h[t].assign(h, h + state);
    }
    std::copy(h, h + state, h_prev.begin());
    c_prev.swap(c);
  }
  return hs;
}

void convlstm2d_sequence_backward(const Tensor& x, const ConvLstmWeights& weights, const ConvLstmTrace& trace,
                                  const Tensor& dh_seq, Tensor* dx, ConvLstmWeights& dweights) {
  constexpr const char* what = "convlstm2d";
  const std::size_t T = x.dim(0);
  const auto lg = lstm_geometry(what, x.dim(1), x.dim(2), x.dim(3), weights);
  const std::size_t P = lg.H * lg.W;
  const std::size_t F = lg.F;
  const std::size_t G = 4 * F;
  const std::size_t state = P * F;

  std::vector<double> dz(T * P * G);
  std::vector<double> dh_next(state, 0.0), dc_next(state, 0.0);
  for (std::size_t step = T; step-- > 0;) {
    const double* gates = trace.gates[step].data();
    const double* c = trace.c[step].data();
    const double* c_prev = step > 0 ? trace.c[step - 1].data() : nullptr;
    const double* dh_up = dh_seq.ptr() + step * state;
    double* dzt = dz.data() + step * P * G;
    for (std::size_t p = 0; p < P; ++p) {
      const double* gp = gates + p * G;
      double* dzp = dzt + p * G;
      for (std::size_t k = 0; k < F; ++k) {
        const std::size_t s = p * F + k;
        const double i = gp[k], f = gp[F + k], g = gp[2 * F + k], o = gp[3 * F + k];
        const double dh = dh_up[s] + dh_next[s];
        const double tc = std::tanh(c[s]);
        const double dc = dc_next[s] + dh * o * (1.0 - tc * tc);
        const double cp = c_prev ? c_prev[p * F + k] : 0.0;
        dzp[k] = dc * g * i * (1.0 - i);
        dzp[F + k] = dc * cp * f * (1.0 - f);
        dzp[2 * F + k] = dc * i * (1.0 - g * g);
        dzp[3 * F + k] = dh * tc * o * (1.0 - o);
        dc_next[s] = dc * f;
      }
    }
    std::fill(dh_next.begin(), dh_next.end(), 0.0);
    if (step > 0) {
      conv_backward(lg.recurrent, trace.h[step - 1].data(), weights.recurrent_kernel.ptr(), G, dzt, dh_next.data(),
                    dweights.recurrent_kernel.ptr(), nullptr);
    }
  }
  const auto gx = ConvGeometry::make(what, {T, lg.H, lg.W}, lg.Cin, {1, weights.kernel.dim(0), weights.kernel.dim(1)},
                                     {1, 1, 1}, Padding::same);
  conv_backward(gx, x.ptr(), weights.kernel.ptr(), G, dz.data(), dx ? dx->ptr() : nullptr, dweights.kernel.ptr(),
                dweights.bias.ptr());
}

}  // namespace lr::nn
