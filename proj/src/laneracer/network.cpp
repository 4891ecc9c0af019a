#include "laneracer/network.hpp"

#include <cmath>
#include <cstdio>

#include "laneracer/error.hpp"
#include "laneracer/rng.hpp"

namespace lr::nn {

namespace {

struct KindName {
  LayerKind kind;
  const char* name;
};

constexpr KindName kKindNames[] = {
    {LayerKind::conv2d, "conv2d"},       {LayerKind::conv3d, "conv3d"},
    {LayerKind::convlstm2d, "convlstm2d"}, {LayerKind::dense, "dense"},
    {LayerKind::relu, "relu"},           {LayerKind::tanh, "tanh"},
    {LayerKind::sigmoid, "sigmoid"},     {LayerKind::maxpool2d, "maxpool2d"},
    {LayerKind::maxpool3d, "maxpool3d"}, {LayerKind::flatten, "flatten"},
    {LayerKind::time_distributed, "time_distributed"}, {LayerKind::drive_head, "drive_head"},
};

std::string layer_label(std::size_t index, const LayerSpec& spec) {
  return "layer " + std::to_string(index) + " (" + kind_name(spec.kind) + ")";
}

void expect_rank(std::size_t index, const LayerSpec& spec, const Shape& in, std::size_t rank) {
  if (in.size() != rank) {
    fail(ErrorCode::shape_mismatch, layer_label(index, spec) + " expects rank-" + std::to_string(rank) +
                                        " input, got " + shape_str(in));
  }
}

// [T,H,W,C] view of a 2-D or 3-D activation.
Dims3 spatial3(const Shape& s) {
  return s.size() == 3 ? Dims3{1, s[0], s[1]} : Dims3{s[0], s[1], s[2]};
}

ConvLstmWeights lstm_view(const ParamSet& params, std::size_t first) {
  return ConvLstmWeights{params[first], params[first + 1], params[first + 2]};
}

}  // namespace

std::string kind_name(LayerKind kind) {
  for (const auto& kn : kKindNames) {
    if (kn.kind == kind) return kn.name;
  }
  return "unknown";
}

std::optional<LayerKind> kind_from_name(const std::string& name) {
  for (const auto& kn : kKindNames) {
    if (name == kn.name) return kn.kind;
  }
  return std::nullopt;
}

std::string role_name(ParamRole role) {
  switch (role) {
    case ParamRole::kernel: return "kernel";
    case ParamRole::recurrent_kernel: return "recurrent_kernel";
    case ParamRole::bias: return "bias";
  }
  return "unknown";
}

bool LayerSpec::parametric() const {
  switch (kind) {
    case LayerKind::conv2d:
    case LayerKind::conv3d:
    case LayerKind::convlstm2d:
    case LayerKind::dense: return true;
    case LayerKind::time_distributed: return inner == LayerKind::conv2d;
    default: return false;
  }
}

LayerSpec conv2d_layer(std::size_t filters, std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw,
                       Padding padding) {
  LayerSpec s;
  s.kind = LayerKind::conv2d;
  s.units = filters;
  s.kernel = {1, kh, kw};
  s.stride = {1, sh, sw};
  s.padding = padding;
  return s;
}

LayerSpec conv3d_layer(std::size_t filters, Dims3 kernel, Dims3 stride, Padding padding) {
  LayerSpec s;
  s.kind = LayerKind::conv3d;
  s.units = filters;
  s.kernel = kernel;
  s.stride = stride;
  s.padding = padding;
  return s;
}

LayerSpec convlstm2d_layer(std::size_t filters, std::size_t kh, std::size_t kw, bool return_sequences) {
  LayerSpec s;
  s.kind = LayerKind::convlstm2d;
  s.units = filters;
  s.kernel = {1, kh, kw};
  s.padding = Padding::same;
  s.return_sequences = return_sequences;
  return s;
}

LayerSpec dense_layer(std::size_t units) {
  LayerSpec s;
  s.kind = LayerKind::dense;
  s.units = units;
  return s;
}

LayerSpec maxpool2d_layer(std::size_t wh, std::size_t ww, std::size_t sh, std::size_t sw) {
  LayerSpec s;
  s.kind = LayerKind::maxpool2d;
  s.kernel = {1, wh, ww};
  s.stride = {1, sh, sw};
  return s;
}

LayerSpec maxpool3d_layer(Dims3 window, Dims3 stride) {
  LayerSpec s;
  s.kind = LayerKind::maxpool3d;
  s.kernel = window;
  s.stride = stride;
  return s;
}

LayerSpec activation_layer(LayerKind kind) {
  if (kind != LayerKind::relu && kind != LayerKind::tanh && kind != LayerKind::sigmoid) {
    fail(ErrorCode::invalid_argument, "activation_layer: " + kind_name(kind) + " is not an activation");
  }
  LayerSpec s;
  s.kind = kind;
  return s;
}

LayerSpec flatten_layer() {
  LayerSpec s;
  s.kind = LayerKind::flatten;
  return s;
}

LayerSpec drive_head_layer() {
  LayerSpec s;
  s.kind = LayerKind::drive_head;
  return s;
}

LayerSpec time_distributed(LayerSpec inner) {
  if (inner.kind != LayerKind::conv2d && inner.kind != LayerKind::maxpool2d) {
    fail(ErrorCode::invalid_argument, "time_distributed wraps conv2d or maxpool2d, not " + kind_name(inner.kind));
  }
  inner.inner = inner.kind;
  inner.kind = LayerKind::time_distributed;
  return inner;
}

GradStore::GradStore(const std::vector<ParamInfo>& infos) : infos_(infos) {
  grads_.reserve(infos.size());
  for (const auto& info : infos) grads_.emplace_back(info.shape);
}

const Tensor* GradStore::find(std::size_t layer, ParamRole role) const {
  for (std::size_t i = 0; i < infos_.size(); ++i) {
    if (infos_[i].layer == layer && infos_[i].role == role) return &grads_[i];
  }
  return nullptr;
}

void GradStore::zero() {
  for (auto& g : grads_) g.fill(0.0);
}

Network::Network(Shape input_shape, std::vector<LayerSpec> layers) : layers_(std::move(layers)) {
  if (input_shape.empty() || input_shape.size() > kMaxRank) {
    fail(ErrorCode::shape_mismatch, "network input rank must be in [1, 5], got " + shape_str(input_shape));
  }
  shapes_.push_back(input_shape);
  auto add_param = [&](std::size_t layer, ParamRole role, Shape shape, std::size_t fan_in, std::size_t fan_out) {
    char prefix[16];
    std::snprintf(prefix, sizeof prefix, "%02zu.", layer);
    params_.push_back(ParamInfo{layer, role, shape,
                                prefix + kind_name(layers_[layer].kind) + "." + role_name(role), fan_in, fan_out});
  };

  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    const Shape& in = shapes_.back();
    first_param_.push_back(params_.size());
    Shape out;
    const std::string label = layer_label(i, spec);
    switch (spec.kind) {
      case LayerKind::conv2d: {
        expect_rank(i, spec, in, 3);
        if (spec.units == 0) fail(ErrorCode::invalid_argument, label + ": zero filters");
        const auto g = ConvGeometry::make(label, {1, in[0], in[1]}, in[2], spec.kernel, spec.stride, spec.padding);
        out = {g.out[1], g.out[2], spec.units};
        const std::size_t kvol = spec.kernel[1] * spec.kernel[2];
        add_param(i, ParamRole::kernel, {spec.kernel[1], spec.kernel[2], in[2], spec.units}, kvol * in[2],
                  kvol * spec.units);
        add_param(i, ParamRole::bias, {spec.units}, 0, 0);
        break;
      }
      case LayerKind::conv3d: {
        expect_rank(i, spec, in, 4);
        if (spec.units == 0) fail(ErrorCode::invalid_argument, label + ": zero filters");
        const auto g = ConvGeometry::make(label, {in[0], in[1], in[2]}, in[3], spec.kernel, spec.stride, spec.padding);
        out = {g.out[0], g.out[1], g.out[2], spec.units};
        const std::size_t kvol = spec.kernel[0] * spec.kernel[1] * spec.kernel[2];
        add_param(i, ParamRole::kernel, {spec.kernel[0], spec.kernel[1], spec.kernel[2], in[3], spec.units},
                  kvol * in[3], kvol * spec.units);
        add_param(i, ParamRole::bias, {spec.units}, 0, 0);
        break;
      }
      case LayerKind::time_distributed: {
        expect_rank(i, spec, in, 4);
        if (spec.inner == LayerKind::conv2d) {
          if (spec.units == 0) fail(ErrorCode::invalid_argument, label + ": zero filters");
          const auto g = ConvGeometry::make(label, {in[0], in[1], in[2]}, in[3], {1, spec.kernel[1], spec.kernel[2]},
                                            {1, spec.stride[1], spec.stride[2]}, spec.padding);
          out = {in[0], g.out[1], g.out[2], spec.units};
          const std::size_t kvol = spec.kernel[1] * spec.kernel[2];
          add_param(i, ParamRole::kernel, {spec.kernel[1], spec.kernel[2], in[3], spec.units}, kvol * in[3],
                    kvol * spec.units);
          add_param(i, ParamRole::bias, {spec.units}, 0, 0);
        } else if (spec.inner == LayerKind::maxpool2d) {
          const auto g = PoolGeometry::make(label, {in[0], in[1], in[2]}, in[3], {1, spec.kernel[1], spec.kernel[2]},
                                            {1, spec.stride[1], spec.stride[2]});
          out = {in[0], g.out[1], g.out[2], in[3]};
        } else {
          fail(ErrorCode::invalid_argument, label + ": unsupported wrapped kind " + kind_name(spec.inner));
        }
        break;
      }
      case LayerKind::convlstm2d: {
        if (in.size() != 3 && in.size() != 4) {
          fail(ErrorCode::shape_mismatch, label + " expects [H,W,C] or [T,H,W,C] input, got " + shape_str(in));
        }
        if (spec.units == 0) fail(ErrorCode::invalid_argument, label + ": zero filters");
        const Dims3 s3 = spatial3(in);
        const std::size_t cin = in.back();
        const std::size_t F = spec.units;
        out = spec.return_sequences ? Shape{s3[0], s3[1], s3[2], F} : Shape{s3[1], s3[2], F};
        const std::size_t kvol = spec.kernel[1] * spec.kernel[2];
        add_param(i, ParamRole::kernel, {spec.kernel[1], spec.kernel[2], cin, 4 * F}, kvol * cin, kvol * 4 * F);
        add_param(i, ParamRole::recurrent_kernel, {spec.kernel[1], spec.kernel[2], F, 4 * F}, kvol * F, kvol * 4 * F);
        add_param(i, ParamRole::bias, {4 * F}, 0, 0);
        break;
      }
      case LayerKind::dense: {
        expect_rank(i, spec, in, 1);
        if (spec.units == 0) fail(ErrorCode::invalid_argument, label + ": zero units");
        out = {spec.units};
        add_param(i, ParamRole::kernel, {in[0], spec.units}, in[0], spec.units);
        add_param(i, ParamRole::bias, {spec.units}, 0, 0);
        break;
      }
      case LayerKind::relu:
      case LayerKind::tanh:
      case LayerKind::sigmoid: out = in; break;
      case LayerKind::maxpool2d: {
        expect_rank(i, spec, in, 3);
        const auto g = PoolGeometry::make(label, {1, in[0], in[1]}, in[2], {1, spec.kernel[1], spec.kernel[2]},
                                          {1, spec.stride[1], spec.stride[2]});
        out = {g.out[1], g.out[2], in[2]};
        break;
      }
      case LayerKind::maxpool3d: {
        expect_rank(i, spec, in, 4);
        const auto g = PoolGeometry::make(label, {in[0], in[1], in[2]}, in[3], spec.kernel, spec.stride);
        out = {g.out[0], g.out[1], g.out[2], in[3]};
        break;
      }
      case LayerKind::flatten: out = {shape_size(in)}; break;
      case LayerKind::drive_head: {
        if (in != Shape{2}) fail(ErrorCode::shape_mismatch, label + " expects a [2] input, got " + shape_str(in));
        out = in;
        break;
      }
    }
    shapes_.push_back(out);
  }
}

std::size_t Network::param_count() const {
  std::size_t n = 0;
  for (const auto& p : params_) n += shape_size(p.shape);
  return n;
}

ParamSet Network::init_params(std::uint64_t seed) const {
  ParamSet out;
  out.reserve(params_.size());
  for (std::size_t i = 0; i < params_.size(); ++i) {
    const auto& info = params_[i];
    Tensor t(info.shape);
    if (info.role != ParamRole::bias) {
      const double limit = std::sqrt(6.0 / static_cast<double>(info.fan_in + info.fan_out));
      Rng rng(derive_seed(seed, i));
      for (auto& v : t.data()) v = rng.uniform(-limit, limit);
    }
    out.push_back(std::move(t));
  }
  return out;
}

ParamSet Network::zero_params() const {
  ParamSet out;
  for (const auto& info : params_) out.emplace_back(info.shape);
  return out;
}

void Network::check_params(const ParamSet& params) const {
  if (params.size() != params_.size()) {
    fail(ErrorCode::shape_mismatch, "network expects " + std::to_string(params_.size()) + " parameter tensors, got " +
                                        std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != params_[i].shape) {
      fail(ErrorCode::shape_mismatch, "parameter " + params_[i].name + " has shape " + shape_str(params[i].shape()) +
                                          ", expected " + shape_str(params_[i].shape));
    }
  }
}

Tensor Network::forward(const ParamSet& params, const Tensor& x, Trace* trace) const {
  check_params(params);
  if (x.shape() != input_shape()) {
    fail(ErrorCode::shape_mismatch, "network input " + shape_str(x.shape()) + " does not match expected " +
                                        shape_str(input_shape()));
  }
  if (trace) {
    trace->acts.assign(1, x);
    trace->argmax.assign(layers_.size(), {});
    trace->lstm.assign(layers_.size(), {});
  }
  Tensor cur = x;
  for (std::size_t i = 0; i < layers_.size(); ++i) {
    const LayerSpec& spec = layers_[i];
    const Shape& in = shapes_[i];
    const Shape& out_shape = shapes_[i + 1];
    const std::size_t p0 = first_param_[i];
    Tensor out(out_shape);
    switch (spec.kind) {
      case LayerKind::conv2d:
      case LayerKind::conv3d:
      case LayerKind::time_distributed: {
        const Dims3 s3 = spatial3(in);
        const std::size_t cin = in.back();
        if (spec.kind == LayerKind::time_distributed && spec.inner == LayerKind::maxpool2d) {
          const auto g = PoolGeometry::make("", s3, cin, {1, spec.kernel[1], spec.kernel[2]},
                                            {1, spec.stride[1], spec.stride[2]});
          std::vector<std::size_t> argmax(out.size());
          maxpool_forward(g, cur.ptr(), out.ptr(), argmax.data());
          if (trace) trace->argmax[i] = std::move(argmax);
          break;
        }
        const bool temporal = spec.kind == LayerKind::conv3d;
        const auto g = ConvGeometry::make("", s3, cin, temporal ? spec.kernel : Dims3{1, spec.kernel[1], spec.kernel[2]},
                                          temporal ? spec.stride : Dims3{1, spec.stride[1], spec.stride[2]},
                                          spec.padding);
        conv_forward(g, cur.ptr(), params[p0].ptr(), params[p0 + 1].ptr(), spec.units, out.ptr());
        break;
      }
      case LayerKind::convlstm2d: {
        const Dims3 s3 = spatial3(in);
        const Tensor seq = cur.reshaped({s3[0], s3[1], s3[2], in.back()});
        ConvLstmTrace* lt = trace ? &trace->lstm[i] : nullptr;
        Tensor hs = convlstm2d_sequence(seq, lstm_view(params, p0), lt);
        if (spec.return_sequences) {
          out = std::move(hs);
        } else {
          const std::size_t state = shape_size(out_shape);
          std::copy(hs.ptr() + (s3[0] - 1) * state, hs.ptr() + s3[0] * state, out.ptr());
        }
        break;
      }
      case LayerKind::dense: out = dense(cur, params[p0], params[p0 + 1]); break;
      case LayerKind::relu: out = relu(cur); break;
      case LayerKind::tanh: out = nn::tanh(cur); break;
      case LayerKind::sigmoid: out = sigmoid(cur); break;
      case LayerKind::maxpool2d:
      case LayerKind::maxpool3d: {
        const auto g = PoolGeometry::make("", spatial3(in), in.back(), spec.kind == LayerKind::maxpool3d
                                                                            ? spec.kernel
                                                                            : Dims3{1, spec.kernel[1], spec.kernel[2]},
                                          spec.kind == LayerKind::maxpool3d ? spec.stride
                                                                            : Dims3{1, spec.stride[1], spec.stride[2]});
        std::vector<std::size_t> argmax(out.size());
        maxpool_forward(g, cur.ptr(), out.ptr(), argmax.data());
        if (trace) trace->argmax[i] = std::move(argmax);
        break;
      }
      case LayerKind::flatten: out = cur.reshaped(out_shape); break;
      case LayerKind::drive_head:
        out[0] = sigmoid(cur[0]);
        out[1] = std::tanh(cur[1]);
        break;
    }
    if (trace) trace->acts.push_back(out);
    cur = std::move(out);
  }
  return cur;
}

void Network::backward(const ParamSet& params, const Trace& trace, const Tensor& dy, GradStore& grads) const {
  if (dy.shape() != output_shape()) {
    fail(ErrorCode::shape_mismatch, "backward: upstream gradient " + shape_str(dy.shape()) + " vs output " +
                                        shape_str(output_shape()));
  }
  Tensor grad = dy;
  for (std::size_t i = layers_.size(); i-- > 0;) {
    const LayerSpec& spec = layers_[i];
    const Shape& in = shapes_[i];
    const Tensor& x = trace.acts[i];
    const Tensor& y = trace.acts[i + 1];
    const std::size_t p0 = first_param_[i];
    const bool need_dx = i > 0;
    Tensor dx(in);
    switch (spec.kind) {
      case LayerKind::conv2d:
      case LayerKind::conv3d:
      case LayerKind::time_distributed: {
        const Dims3 s3 = spatial3(in);
        const std::size_t cin = in.back();
        if (spec.kind == LayerKind::time_distributed && spec.inner == LayerKind::maxpool2d) {
          const auto g = PoolGeometry::make("", s3, cin, {1, spec.kernel[1], spec.kernel[2]},
                                            {1, spec.stride[1], spec.stride[2]});
          maxpool_backward(g, grad.ptr(), trace.argmax[i].data(), dx.ptr());
          break;
        }
        const bool temporal = spec.kind == LayerKind::conv3d;
        const auto g = ConvGeometry::make("", s3, cin, temporal ? spec.kernel : Dims3{1, spec.kernel[1], spec.kernel[2]},
                                          temporal ? spec.stride : Dims3{1, spec.stride[1], spec.stride[2]},
                                          spec.padding);
        conv_backward(g, x.ptr(), params[p0].ptr(), spec.units, grad.ptr(), need_dx ? dx.ptr() : nullptr,
                      grads[p0].ptr(), grads[p0 + 1].ptr());
        break;
      }
      case LayerKind::convlstm2d: {
        const Dims3 s3 = spatial3(in);
        const Tensor seq = x.reshaped({s3[0], s3[1], s3[2], in.back()});
        Tensor dh_seq({s3[0], s3[1], s3[2], spec.units});
        if (spec.return_sequences) {
          std::copy(grad.ptr(), grad.ptr() + grad.size(), dh_seq.ptr());
        } else {
          std::copy(grad.ptr(), grad.ptr() + grad.size(), dh_seq.ptr() + (s3[0] - 1) * grad.size());
        }
        ConvLstmWeights dw{grads[p0], grads[p0 + 1], grads[p0 + 2]};
        Tensor dseq(seq.shape());
        convlstm2d_sequence_backward(seq, lstm_view(params, p0), trace.lstm[i], dh_seq, need_dx ? &dseq : nullptr, dw);
        grads[p0] = std::move(dw.kernel);
        grads[p0 + 1] = std::move(dw.recurrent_kernel);
        grads[p0 + 2] = std::move(dw.bias);
        if (need_dx) dx = dseq.reshaped(in);
        break;
      }
      case LayerKind::dense: {
        const std::size_t n = in[0];
        const std::size_t m = spec.units;
        double* dW = grads[p0].ptr();
        double* db = grads[p0 + 1].ptr();
        const double* W = params[p0].ptr();
        for (std::size_t j = 0; j < m; ++j) db[j] += grad[j];
        for (std::size_t r = 0; r < n; ++r) {
          const double xr = x[r];
          double* dWr = dW + r * m;
          const double* Wr = W + r * m;
          double acc = 0.0;
          for (std::size_t j = 0; j < m; ++j) {
            dWr[j] += xr * grad[j];
            acc += Wr[j] * grad[j];
          }
          dx[r] = acc;
        }
        break;
      }
      case LayerKind::relu:
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = x[k] > 0.0 ? grad[k] : 0.0;
        break;
      case LayerKind::tanh:
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = grad[k] * (1.0 - y[k] * y[k]);
        break;
      case LayerKind::sigmoid:
        for (std::size_t k = 0; k < dx.size(); ++k) dx[k] = grad[k] * y[k] * (1.0 - y[k]);
        break;
      case LayerKind::maxpool2d:
      case LayerKind::maxpool3d: {
        const auto g = PoolGeometry::make("", spatial3(in), in.back(), spec.kind == LayerKind::maxpool3d
                                                                            ? spec.kernel
                                                                            : Dims3{1, spec.kernel[1], spec.kernel[2]},
                                          spec.kind == LayerKind::maxpool3d ? spec.stride
                                                                            : Dims3{1, spec.stride[1], spec.stride[2]});
        maxpool_backward(g, grad.ptr(), trace.argmax[i].data(), dx.ptr());
        break;
      }
      case LayerKind::flatten: dx = grad.reshaped(in); break;
      case LayerKind::drive_head:
        dx[0] = grad[0] * y[0] * (1.0 - y[0]);
        dx[1] = grad[1] * (1.0 - y[1] * y[1]);
        break;
    }
    if (!need_dx) break;
    grad = std::move(dx);
  }
}

BackwardResult backward(const Network& net, const ParamSet& params, std::span<const Tensor> inputs,
                        const Tensor& targets) {
  const std::size_t B = inputs.size();
  if (B == 0) fail(ErrorCode::invalid_argument, "backward: empty batch");
  const Shape& out_shape = net.output_shape();
  if (out_shape.size() != 1) fail(ErrorCode::shape_mismatch, "backward: network output must be a vector");
  const std::size_t k = out_shape[0];
  if (targets.shape() != Shape{B, k}) {
    fail(ErrorCode::shape_mismatch, "backward: targets " + shape_str(targets.shape()) + " vs expected " +
                                        shape_str({B, k}));
  }
  BackwardResult result{0.0, GradStore(net.params()), Tensor({B, k})};
  const double scale = 2.0 / static_cast<double>(B * k);
  Network::Trace trace;
  for (std::size_t b = 0; b < B; ++b) {
    const Tensor y = net.forward(params, inputs[b], &trace);
    Tensor dy(out_shape);
    for (std::size_t j = 0; j < k; ++j) {
      result.predictions[b * k + j] = y[j];
      dy[j] = scale * (y[j] - targets[b * k + j]);
    }
    net.backward(params, trace, dy, result.grads);
  }
  result.loss = mse_loss(result.predictions, targets);
  if (!std::isfinite(result.loss)) fail(ErrorCode::numeric, "backward: non-finite loss");
  return result;
}

}  // namespace lr::nn
