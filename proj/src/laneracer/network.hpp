#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "laneracer/conv.hpp"
#include "laneracer/layers.hpp"
#include "laneracer/tensor.hpp"

namespace lr::nn {

enum class LayerKind {
  conv2d,
  conv3d,
  convlstm2d,
  dense,
  relu,
  tanh,
  sigmoid,
  maxpool2d,
  maxpool3d,
  flatten,
  time_distributed,
  // Two-unit output head: sigmoid on unit 0 (linear speed), tanh on unit 1 (angular speed).
  drive_head,
};

std::string kind_name(LayerKind kind);
std::optional<LayerKind> kind_from_name(const std::string& name);

struct LayerSpec {
  LayerKind kind = LayerKind::relu;
  LayerKind inner = LayerKind::conv2d;  // wrapped kind for time_distributed: conv2d or maxpool2d
  Dims3 kernel{1, 1, 1};                // (t, h, w); 2-D kinds keep t = 1. Window for pooling.
  Dims3 stride{1, 1, 1};
  Padding padding = Padding::valid;
  std::size_t units = 0;  // filters or dense units
  bool return_sequences = false;

  bool parametric() const;
};

LayerSpec conv2d_layer(std::size_t filters, std::size_t kh, std::size_t kw, std::size_t sh, std::size_t sw,
                       Padding padding);
LayerSpec conv3d_layer(std::size_t filters, Dims3 kernel, Dims3 stride, Padding padding);
LayerSpec convlstm2d_layer(std::size_t filters, std::size_t kh, std::size_t kw, bool return_sequences);
LayerSpec dense_layer(std::size_t units);
LayerSpec maxpool2d_layer(std::size_t wh, std::size_t ww, std::size_t sh, std::size_t sw);
LayerSpec maxpool3d_layer(Dims3 window, Dims3 stride);
LayerSpec activation_layer(LayerKind kind);
LayerSpec flatten_layer();
LayerSpec drive_head_layer();
LayerSpec time_distributed(LayerSpec inner);

enum class ParamRole { kernel, recurrent_kernel, bias };
std::string role_name(ParamRole role);

struct ParamInfo {
  std::size_t layer = 0;
  ParamRole role = ParamRole::kernel;
  Shape shape;
  std::string name;  // e.g. "03.conv3d.kernel"
  std::size_t fan_in = 0;
  std::size_t fan_out = 0;
};

using ParamSet = std::vector<Tensor>;

// Gradients aligned one-to-one with a network's parameter list.
class GradStore {
 public:
  GradStore() = default;
  explicit GradStore(const std::vector<ParamInfo>& infos);

  std::size_t size() const { return grads_.size(); }
  Tensor& operator[](std::size_t i) { return grads_[i]; }
  const Tensor& operator[](std::size_t i) const { return grads_[i]; }
  const Tensor* find(std::size_t layer, ParamRole role) const;
  void zero();

  const std::vector<ParamInfo>& infos() const { return infos_; }

 private:
  std::vector<ParamInfo> infos_;
  std::vector<Tensor> grads_;
};

class Network {
 public:
  // Per-layer values retained by a traced forward pass.
  struct Trace {
    std::vector<Tensor> acts;  // acts[i] is the input of layer i; acts.back() the output
    std::vector<std::vector<std::size_t>> argmax;
    std::vector<ConvLstmTrace> lstm;
  };

  Network(Shape input_shape, std::vector<LayerSpec> layers);

  const Shape& input_shape() const { return shapes_.front(); }
  const Shape& output_shape() const { return shapes_.back(); }
  const std::vector<LayerSpec>& layers() const { return layers_; }
  const std::vector<Shape>& shapes() const { return shapes_; }
  const std::vector<ParamInfo>& params() const { return params_; }
  std::size_t param_count() const;

  // Glorot-uniform kernels, zero biases. Each parameter draws from its own
  // stream derived from (seed, parameter index).
  ParamSet init_params(std::uint64_t seed) const;
  ParamSet zero_params() const;
  void check_params(const ParamSet& params) const;

  Tensor forward(const ParamSet& params, const Tensor& x, Trace* trace = nullptr) const;

  // Accumulates parameter gradients for one sample given dL/d(output).
  void backward(const ParamSet& params, const Trace& trace, const Tensor& dy, GradStore& grads) const;

 private:
  std::vector<LayerSpec> layers_;
  std::vector<Shape> shapes_;
  std::vector<ParamInfo> params_;
  std::vector<std::size_t> first_param_;  // index into params_ of each layer's first parameter
};

struct BackwardResult {
  double loss = 0.0;
  GradStore grads;
  Tensor predictions;  // [B, k]
};

// Mean-squared error over every element of a [B, k] target batch and its gradient.
BackwardResult backward(const Network& net, const ParamSet& params, std::span<const Tensor> inputs,
                        const Tensor& targets);

}  // namespace lr::nn
