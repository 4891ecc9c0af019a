#include <doctest.h>

#include <cmath>
#include <functional>

#include "laneracer/adam.hpp"
#include "laneracer/error.hpp"
#include "laneracer/layers.hpp"
#include "laneracer/network.hpp"
#include "laneracer/rng.hpp"
#include "support/oracles.hpp"

using namespace lr::nn;

namespace {

Tensor random_tensor(Shape shape, lr::Rng& rng, double scale = 1.0) {
  Tensor t(std::move(shape));
  for (auto& v : t.data()) v = rng.uniform(-scale, scale);
  return t;
}

// Central-difference relative error of every parameter and of the input.
double max_grad_error(const Network& net, ParamSet params, const Tensor& x, const Tensor& target) {
  const std::vector<Tensor> inputs{x};
  const auto analytic = backward(net, params, inputs, target);
  auto loss_at = [&](const ParamSet& p) { return mse_loss(net.forward(p, x).reshaped(target.shape()), target); };
  constexpr double h = 1e-5;
  double worst = 0.0;
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      const double saved = params[i][k];
      params[i][k] = saved + h;
      const double up = loss_at(params);
      params[i][k] = saved - h;
      const double down = loss_at(params);
      params[i][k] = saved;
      const double numeric = (up - down) / (2 * h);
      const double a = analytic.grads[i][k];
      const double denom = std::max({std::abs(a), std::abs(numeric), 1e-5});
      worst = std::max(worst, std::abs(a - numeric) / denom);
    }
  }
  return worst;
}

}  // namespace

TEST_CASE("conv2d scalar kernel scales the input") {
  const Tensor x({2, 2, 1}, {1, 2, 3, 4});
  const Tensor k({1, 1, 1, 1}, {2});
  const Tensor b({1}, {0});
  const Tensor y = conv2d(x, k, b, {1, 1}, Padding::valid);
  CHECK(y == Tensor({2, 2, 1}, {2, 4, 6, 8}));
}

TEST_CASE("conv2d zero kernel yields the bias everywhere") {
  lr::Rng rng(3);
  const Tensor x = random_tensor({5, 7, 2}, rng);
  const Tensor k({3, 3, 2, 3});
  const Tensor b({3}, {0.5, -1.0, 2.0});
  const Tensor y = conv2d(x, k, b, {1, 1}, Padding::same);
  for (std::size_t i = 0; i < y.size(); ++i) CHECK(y[i] == b[i % 3]);
}

TEST_CASE("conv2d output dims and oracle agreement") {
  lr::Rng rng(11);
  const Tensor x = random_tensor({8, 8, 3}, rng);
  const Tensor k = random_tensor({3, 3, 3, 4}, rng);
  const Tensor b = random_tensor({4}, rng);
  const Tensor y = conv2d(x, k, b, {1, 1}, Padding::valid);
  CHECK(y.shape() == Shape{6, 6, 4});
  CHECK(max_abs_diff(y, oracle::conv2d(x, k, b, 1, 1, false)) < 1e-9);

  const Tensor ys = conv2d(x, k, b, {2, 2}, Padding::same);
  CHECK(ys.shape() == Shape{4, 4, 4});
  CHECK(max_abs_diff(ys, oracle::conv2d(x, k, b, 2, 2, true)) < 1e-9);
}

TEST_CASE("conv2d shape errors name the offending dimension") {
  const Tensor x({4, 4, 2});
  const Tensor b({1});
  CHECK_THROWS_WITH_AS(conv2d(x, Tensor({3, 3, 3, 1}), b, {1, 1}, Padding::valid),
                       doctest::Contains("kernel input channels"), lr::Error);
  CHECK_THROWS_WITH_AS(conv2d(x, Tensor({5, 3, 2, 1}), b, {1, 1}, Padding::valid),
                       doctest::Contains("height"), lr::Error);
  CHECK_NOTHROW(conv2d(x, Tensor({5, 3, 2, 1}), b, {1, 1}, Padding::same));
}

TEST_CASE("conv3d identity kernel and temporal constancy") {
  lr::Rng rng(5);
  const Tensor x = random_tensor({3, 4, 5, 1}, rng);
  const Tensor y = conv3d(x, Tensor({1, 1, 1, 1, 1}, {1.0}), Tensor({1}), {1, 1, 1}, Padding::valid);
  CHECK(y == x);

  // Three identical slices averaged over kt = 3 reproduce the 2-D result.
  const Tensor slice = random_tensor({6, 6, 2}, rng);
  Tensor seq({3, 6, 6, 2});
  for (std::size_t t = 0; t < 3; ++t) std::copy(slice.ptr(), slice.ptr() + slice.size(), seq.ptr() + t * slice.size());
  const Tensor k2 = random_tensor({3, 3, 2, 4}, rng);
  const Tensor b = random_tensor({4}, rng);
  Tensor k3({3, 3, 3, 2, 4});
  for (std::size_t t = 0; t < 3; ++t)
    for (std::size_t i = 0; i < k2.size(); ++i) k3[t * k2.size() + i] = k2[i] / 3.0;
  const Tensor y3 = conv3d(seq, k3, b, {1, 1, 1}, Padding::valid);
  const Tensor y2 = conv2d(slice, k2, b, {1, 1}, Padding::valid);
  CHECK(max_abs_diff(y3.reshaped(y2.shape()), y2) < 1e-12);
}

TEST_CASE("conv3d matches the nested-loop oracle") {
  lr::Rng rng(17);
  const Tensor x = random_tensor({3, 6, 6, 2}, rng);
  const Tensor k = random_tensor({2, 3, 3, 2, 3}, rng);
  const Tensor b = random_tensor({3}, rng);
  CHECK(max_abs_diff(conv3d(x, k, b, {1, 1, 1}, Padding::valid), oracle::conv3d(x, k, b, 1, 1, 1, false)) < 1e-9);
  CHECK(max_abs_diff(conv3d(x, k, b, {1, 2, 2}, Padding::same), oracle::conv3d(x, k, b, 1, 2, 2, true)) < 1e-9);
}

TEST_CASE("convlstm2d step with zero weights stays at zero") {
  lr::Rng rng(2);
  const Tensor x = random_tensor({4, 4, 2}, rng);
  ConvLstmWeights w{Tensor({3, 3, 2, 12}), Tensor({3, 3, 3, 12}), Tensor({12})};
  const LstmState s = convlstm2d_step(x, {Tensor({4, 4, 3}), Tensor({4, 4, 3})}, w);
  for (double v : s.h.data()) CHECK(v == 0.0);
  for (double v : s.c.data()) CHECK(v == 0.0);
}

TEST_CASE("convlstm2d saturated forget gate carries the cell state") {
  lr::Rng rng(4);
  const std::size_t F = 3;
  const Tensor x = random_tensor({4, 4, 2}, rng);
  ConvLstmWeights w{Tensor({3, 3, 2, 4 * F}), Tensor({3, 3, F, 4 * F}), Tensor({4 * F})};
  for (std::size_t k = 0; k < F; ++k) {
    w.bias[k] = -50.0;     // input gate closed
    w.bias[F + k] = 50.0;  // forget gate open
  }
  const LstmState prev{random_tensor({4, 4, F}, rng), random_tensor({4, 4, F}, rng)};
  const LstmState next = convlstm2d_step(x, prev, w);
  CHECK(max_abs_diff(next.c, prev.c) < 1e-9);
}

TEST_CASE("convlstm2d step matches a gate-by-gate transcription") {
  lr::Rng rng(8);
  const Tensor x = random_tensor({4, 4, 2}, rng);
  const Tensor h = random_tensor({4, 4, 3}, rng);
  const Tensor c = random_tensor({4, 4, 3}, rng);
  ConvLstmWeights w{random_tensor({3, 3, 2, 12}, rng), random_tensor({3, 3, 3, 12}, rng),
                    random_tensor({12}, rng)};
  const LstmState s = convlstm2d_step(x, {h, c}, w);
  Tensor h_ref, c_ref;
  oracle::convlstm_step(x, h, c, w.kernel, w.recurrent_kernel, w.bias, h_ref, c_ref);
  CHECK(max_abs_diff(s.h, h_ref) < 1e-9);
  CHECK(max_abs_diff(s.c, c_ref) < 1e-9);
}

TEST_CASE("convlstm2d rejects spatial mismatch between state and input") {
  ConvLstmWeights w{Tensor({3, 3, 2, 4}), Tensor({3, 3, 1, 4}), Tensor({4})};
  CHECK_THROWS_AS(convlstm2d_step(Tensor({4, 4, 2}), {Tensor({4, 5, 1}), Tensor({4, 5, 1})}, w), lr::Error);
}

TEST_CASE("dense identity, zero input and oracle") {
  const Tensor x({3}, {1.5, -2.0, 0.25});
  Tensor eye({3, 3});
  for (std::size_t i = 0; i < 3; ++i) eye.at({i, i}) = 1.0;
  CHECK(dense(x, eye, Tensor({3})) == x);
  const Tensor b({2}, {0.3, -0.7});
  CHECK(dense(Tensor({4}), Tensor({4, 2}, 1.0), b) == b);

  lr::Rng rng(21);
  const Tensor xr = random_tensor({5}, rng);
  const Tensor wr = random_tensor({5, 3}, rng);
  const Tensor br = random_tensor({3}, rng);
  CHECK(max_abs_diff(dense(xr, wr, br), oracle::dense(xr, wr, br)) < 1e-12);
  CHECK_THROWS_AS(dense(Tensor({4}), wr, br), lr::Error);
}

TEST_CASE("activations and pooling") {
  const Tensor x({2}, {-1.0, 2.0});
  CHECK(relu(x) == Tensor({2}, {0.0, 2.0}));
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(lr::nn::tanh(Tensor({1}, {0.0}))[0] == 0.0);
  CHECK(maxpool2d(Tensor({2, 2, 1}, {1, 2, 3, 4}), {2, 2}, {2, 2}) == Tensor({1, 1, 1}, {4}));
  CHECK(maxpool3d(Tensor({2, 1, 1, 1}, {7, 3}), {2, 1, 1}, {1, 1, 1}) == Tensor({1, 1, 1, 1}, {7}));
  CHECK_THROWS_AS(maxpool2d(Tensor({2, 2, 1}), {3, 3}, {1, 1}), lr::Error);
}

TEST_CASE("mse and mae") {
  lr::Rng rng(9);
  const Tensor p = random_tensor({7, 2}, rng);
  CHECK(mse_loss(p, p) == 0.0);
  CHECK(mae_metric(p, p) == 0.0);
  Tensor shifted = p;
  for (auto& v : shifted.data()) v += 0.1;
  CHECK(mse_loss(shifted, p) == doctest::Approx(0.01).epsilon(1e-12));
  CHECK(mae_metric(shifted, p) == doctest::Approx(0.1).epsilon(1e-12));

  const Tensor t = random_tensor({7, 2}, rng);
  double se = 0, ae = 0;
  for (std::size_t i = 0; i < 14; ++i) {
    se += (p[i] - t[i]) * (p[i] - t[i]);
    ae += std::abs(p[i] - t[i]);
  }
  CHECK(std::abs(mse_loss(p, t) - se / 14) < 1e-12);
  CHECK(std::abs(mae_metric(p, t) - ae / 14) < 1e-12);
  CHECK_THROWS_AS(mse_loss(p, Tensor({7, 1})), lr::Error);
}

TEST_CASE("backward on a single dense layer equals the closed form") {
  lr::Rng rng(31);
  const std::size_t B = 4, n = 3;
  const Network net({n}, {dense_layer(1)});
  const ParamSet params = net.init_params(1);
  std::vector<Tensor> xs;
  Tensor targets({B, 1});
  for (std::size_t b = 0; b < B; ++b) {
    xs.push_back(random_tensor({n}, rng));
    targets[b] = rng.uniform(-1, 1);
  }
  const auto r = backward(net, params, xs, targets);
  for (std::size_t i = 0; i < n; ++i) {
    double expect = 0.0;
    for (std::size_t b = 0; b < B; ++b) {
      const double resid = oracle::dense(xs[b], params[0], params[1])[0] - targets[b];
      expect += 2.0 / B * xs[b][i] * resid;
    }
    CHECK(std::abs(r.grads[0][i] - expect) < 1e-12);
  }
}

TEST_CASE("backward at the exact minimum gives zero gradients") {
  lr::Rng rng(32);
  const Network net({6, 6, 1}, {conv2d_layer(2, 3, 3, 1, 1, Padding::valid), activation_layer(LayerKind::tanh),
                                flatten_layer(), dense_layer(2)});
  const ParamSet params = net.init_params(2);
  const Tensor x = random_tensor({6, 6, 1}, rng);
  const Tensor y = net.forward(params, x);
  const std::vector<Tensor> xs{x};
  const auto r = backward(net, params, xs, y.reshaped({1, 2}));
  CHECK(r.loss == 0.0);
  for (std::size_t i = 0; i < r.grads.size(); ++i)
    for (double g : r.grads[i].data()) CHECK(g == 0.0);
  CHECK(r.predictions.reshaped({2}) == y);
}

TEST_CASE("gradients are bit-identical whatever the buffer alignment") {
  lr::Rng rng(33);
  const Network net({12, 12, 2}, {conv2d_layer(16, 3, 3, 1, 1, Padding::same), activation_layer(LayerKind::relu),
                                  conv2d_layer(24, 3, 3, 2, 2, Padding::same), flatten_layer(), dense_layer(2)});
  const ParamSet params = net.init_params(4);
  std::vector<Tensor> xs;
  for (int b = 0; b < 3; ++b) xs.push_back(random_tensor({12, 12, 2}, rng));
  const Tensor targets({3, 2}, 0.25);
  const auto ref = backward(net, params, xs, targets);
  std::vector<std::vector<double>> padding;
  for (std::size_t shift = 1; shift < 16; ++shift) {
    padding.emplace_back(shift);  // perturb the heap between runs
    const ParamSet copy = params;
    const std::vector<Tensor> xs_copy = xs;
    const auto r = backward(net, copy, xs_copy, targets);
    CHECK(r.loss == ref.loss);
    for (std::size_t i = 0; i < r.grads.size(); ++i) CHECK(r.grads[i] == ref.grads[i]);
  }
}

TEST_CASE("analytic gradients match central differences for every layer kind") {
  lr::Rng rng(77);
  struct Case {
    const char* name;
    Shape input;
    std::vector<LayerSpec> layers;
  };
  const std::vector<Case> cases = {
      {"conv2d", {6, 6, 2}, {conv2d_layer(3, 3, 3, 2, 2, Padding::same), flatten_layer(), dense_layer(2)}},
      {"conv3d", {3, 6, 6, 1}, {conv3d_layer(2, {2, 3, 3}, {1, 2, 1}, Padding::valid), flatten_layer(), dense_layer(2)}},
      {"convlstm2d", {3, 6, 6, 1}, {convlstm2d_layer(2, 3, 3, false), flatten_layer(), dense_layer(2)}},
      {"convlstm2d_seq", {2, 6, 6, 1}, {convlstm2d_layer(2, 3, 3, true), flatten_layer(), dense_layer(2)}},
      {"dense", {6}, {dense_layer(4), dense_layer(2)}},
      {"relu", {6, 6, 1}, {conv2d_layer(2, 3, 3, 1, 1, Padding::valid), activation_layer(LayerKind::relu),
                           flatten_layer(), dense_layer(2)}},
      {"tanh", {6}, {dense_layer(5), activation_layer(LayerKind::tanh), dense_layer(2)}},
      {"sigmoid", {6}, {dense_layer(5), activation_layer(LayerKind::sigmoid), dense_layer(2)}},
      {"maxpool2d", {6, 6, 1}, {conv2d_layer(2, 3, 3, 1, 1, Padding::same), maxpool2d_layer(2, 2, 2, 2),
                                flatten_layer(), dense_layer(2)}},
      {"maxpool3d", {2, 6, 6, 1}, {conv3d_layer(2, {1, 3, 3}, {1, 1, 1}, Padding::same),
                                   maxpool3d_layer({2, 2, 2}, {1, 2, 2}), flatten_layer(), dense_layer(2)}},
      {"flatten", {6, 6, 1}, {flatten_layer(), dense_layer(2)}},
      {"time_distributed", {3, 6, 6, 1}, {time_distributed(conv2d_layer(2, 3, 3, 2, 2, Padding::valid)),
                                          time_distributed(maxpool2d_layer(2, 2, 1, 1)), flatten_layer(),
                                          dense_layer(2)}},
      {"drive_head", {6}, {dense_layer(2), drive_head_layer()}},
  };
  for (const auto& c : cases) {
    CAPTURE(c.name);
    const Network net(c.input, c.layers);
    ParamSet params = net.init_params(rng.next_u64());
    for (auto& p : params)
      for (auto& v : p.data()) v += rng.uniform(-0.1, 0.1);  // non-zero biases
    const Tensor x = random_tensor(c.input, rng);
    const Tensor target = random_tensor({1, 2}, rng);
    CHECK(max_grad_error(net, params, x, target) < 1e-4);
  }
}

TEST_CASE("forward passes are pure") {
  const Network net({3, 8, 8, 3}, {conv3d_layer(4, {3, 3, 3}, {1, 2, 2}, Padding::same),
                                   activation_layer(LayerKind::relu), convlstm2d_layer(2, 3, 3, false),
                                   flatten_layer(), dense_layer(2), drive_head_layer()});
  const ParamSet params = net.init_params(99);
  lr::Rng rng(1);
  const Tensor x = random_tensor({3, 8, 8, 3}, rng);
  const Tensor first = net.forward(params, x);
  for (int i = 0; i < 5; ++i) CHECK(net.forward(params, x) == first);
}

TEST_CASE("convlstm with closed input gate and open forget gate keeps zero state over identical frames") {
  const Network net({3, 4, 4, 1}, {convlstm2d_layer(2, 3, 3, true)});
  ParamSet params = net.init_params(5);
  auto& bias = params[2];
  for (std::size_t k = 0; k < 2; ++k) {
    bias[k] = -50.0;
    bias[2 + k] = 50.0;
  }
  Tensor x({3, 4, 4, 1}, 0.7);
  const Tensor hs = net.forward(params, x);
  for (double v : hs.data()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("adam step behaviour") {
  SUBCASE("zero gradient leaves parameters unchanged and decays moments") {
    ParamSet params{Tensor({2}, {1.0, -2.0})};
    GradStore grads({ParamInfo{0, ParamRole::kernel, {2}, "p", 0, 0}});
    AdamState state(params, {});
    adam_step(params, grads, state);
    CHECK(params[0] == Tensor({2}, {1.0, -2.0}));
    CHECK(state.step == 1);

    AdamState warm(params, {});
    warm.first_moment[0].fill(1.0);
    warm.second_moment[0].fill(1.0);
    ParamSet scratch = params;
    adam_step(scratch, grads, warm);
    CHECK(warm.first_moment[0][0] == doctest::Approx(0.9));
    CHECK(warm.second_moment[0][0] == doctest::Approx(0.999));
  }
  SUBCASE("first step moves by about lr against the gradient sign") {
    ParamSet params{Tensor({2}, {0.0, 0.0})};
    GradStore grads({ParamInfo{0, ParamRole::kernel, {2}, "p", 0, 0}});
    grads[0][0] = 3.0;
    grads[0][1] = -0.02;
    AdamState state(params, {0.01});
    adam_step(params, grads, state);
    CHECK(params[0][0] == doctest::Approx(-0.01).epsilon(1e-6));
    CHECK(params[0][1] == doctest::Approx(0.01).epsilon(1e-5));
  }
  SUBCASE("three steps on a quadratic follow the hand trace") {
    ParamSet params{Tensor({1}, {0.0})};
    GradStore grads({ParamInfo{0, ParamRole::kernel, {1}, "p", 0, 0}});
    AdamState state(params, {0.1});
    const double expected[] = {0.09999999983333335, 0.19989729258521102, 0.29961847654925267};
    for (double e : expected) {
      grads[0][0] = 2.0 * (params[0][0] - 3.0);
      adam_step(params, grads, state);
      CHECK(std::abs(params[0][0] - e) < 1e-10);
    }
    CHECK(state.step == 3);
  }
}
