#include "laneracer/models.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "laneracer/error.hpp"

namespace lr::models {

using nn::activation_layer;
using nn::conv2d_layer;
using nn::conv3d_layer;
using nn::convlstm2d_layer;
using nn::dense_layer;
using nn::drive_head_layer;
using nn::flatten_layer;
using nn::LayerKind;
using nn::LayerSpec;
using nn::Padding;

namespace {

constexpr auto kSame = Padding::same;

LayerSpec relu() { return activation_layer(LayerKind::relu); }

struct ConvStage {
  std::size_t filters, k, stride;
};

// Conv stack followed by ReLU after every convolution.
void conv2d_stack(std::vector<LayerSpec>& out, const std::vector<ConvStage>& stages, bool distributed) {
  for (const auto& s : stages) {
    auto layer = conv2d_layer(s.filters, s.k, s.k, s.stride, s.stride, kSame);
    out.push_back(distributed ? nn::time_distributed(layer) : layer);
    out.push_back(relu());
  }
}

void dense_tail(std::vector<LayerSpec>& out, const std::vector<std::size_t>& hidden) {
  out.push_back(flatten_layer());
  for (auto units : hidden) {
    out.push_back(dense_layer(units));
    out.push_back(relu());
  }
  out.push_back(dense_layer(2));
  out.push_back(drive_head_layer());
}

struct Architecture {
  std::size_t height = 0, width = 0;
  std::vector<LayerSpec> layers;
};

Architecture pilotnet(Scale scale) {
  Architecture a;
  if (scale == Scale::full) {
    a.height = 66;
    a.width = 200;
    conv2d_stack(a.layers, {{24, 5, 2}, {36, 5, 2}, {48, 5, 2}, {64, 3, 1}, {64, 3, 1}}, false);
    dense_tail(a.layers, {1164, 100, 50});
  } else {
    a.height = 16;
    a.width = 48;
    conv2d_stack(a.layers, {{12, 5, 2}, {16, 5, 2}, {24, 3, 2}, {32, 3, 1}, {32, 3, 1}}, false);
    dense_tail(a.layers, {64, 32, 16});
  }
  return a;
}

Architecture pilotnet_x3(Scale scale) {
  Architecture a;
  if (scale == Scale::full) {
    a.height = 50;
    a.width = 100;
    conv2d_stack(a.layers, {{24, 5, 2}, {36, 5, 2}, {48, 5, 2}, {64, 3, 1}, {64, 3, 1}}, true);
    dense_tail(a.layers, {900, 100, 50});
  } else {
    a.height = 16;
    a.width = 32;
    conv2d_stack(a.layers, {{12, 5, 2}, {16, 5, 2}, {24, 3, 2}, {32, 3, 1}, {32, 3, 1}}, true);
    dense_tail(a.layers, {64, 32, 16});
  }
  return a;
}

Architecture deepest_lstm_tiny(Scale scale) {
  Architecture a;
  if (scale == Scale::full) {
    a.height = 50;
    a.width = 100;
    conv2d_stack(a.layers, {{8, 3, 2}, {8, 3, 2}, {16, 3, 2}}, false);
    a.layers.push_back(convlstm2d_layer(8, 3, 3, true));
    a.layers.push_back(convlstm2d_layer(8, 3, 3, false));
    dense_tail(a.layers, {64, 16});
  } else {
    a.height = 16;
    a.width = 32;
    conv2d_stack(a.layers, {{8, 3, 2}, {8, 3, 2}, {16, 3, 1}}, false);
    a.layers.push_back(convlstm2d_layer(8, 3, 3, true));
    a.layers.push_back(convlstm2d_layer(8, 3, 3, false));
    dense_tail(a.layers, {64, 16});
  }
  return a;
}

Architecture memdccp(Scale scale) {
  Architecture a;
  struct Conv3dStage {
    std::size_t filters;
    nn::Dims3 kernel, stride;
  };
  std::vector<Conv3dStage> stages;
  std::vector<std::size_t> lstm_filters;
  std::vector<std::size_t> hidden;
  if (scale == Scale::full) {
    a.height = 50;
    a.width = 100;
    stages = {{24, {3, 5, 5}, {1, 2, 2}},
              {36, {3, 5, 5}, {1, 2, 2}},
              {48, {3, 5, 5}, {1, 2, 2}},
              {64, {3, 3, 3}, {1, 1, 1}},
              {64, {3, 3, 3}, {1, 1, 1}}};
    lstm_filters = {32, 32, 16};
    hidden = {200, 64};
  } else {
    a.height = 16;
    a.width = 32;
    stages = {{8, {3, 3, 3}, {1, 2, 2}},
              {12, {3, 3, 3}, {1, 2, 2}},
              {12, {3, 3, 3}, {1, 1, 1}},
              {12, {3, 3, 3}, {1, 1, 1}},
              {12, {3, 3, 3}, {1, 1, 1}}};
    lstm_filters = {8, 8, 8};
    hidden = {64, 16};
  }
  for (const auto& s : stages) {
    a.layers.push_back(conv3d_layer(s.filters, s.kernel, s.stride, kSame));
    a.layers.push_back(relu());
  }
  // Many-to-one: only the last ConvLSTM collapses the time axis.
  for (std::size_t i = 0; i < lstm_filters.size(); ++i) {
    a.layers.push_back(convlstm2d_layer(lstm_filters[i], 3, 3, i + 1 < lstm_filters.size()));
  }
  dense_tail(a.layers, hidden);
  return a;
}

}  // namespace

std::string model_name_str(ModelName name) {
  switch (name) {
    case ModelName::pilotnet: return "pilotnet";
    case ModelName::deepest_lstm_tiny_pilotnet: return "deepest_lstm_tiny";
    case ModelName::pilotnet_x3: return "pilotnet_x3";
    case ModelName::memdccp: return "memdccp";
  }
  return "unknown";
}

std::optional<ModelName> parse_model_name(const std::string& name) {
  if (name == "pilotnet") return ModelName::pilotnet;
  if (name == "deepest_lstm_tiny" || name == "deepest_lstm_tiny_pilotnet") return ModelName::deepest_lstm_tiny_pilotnet;
  if (name == "pilotnet_x3") return ModelName::pilotnet_x3;
  if (name == "memdccp") return ModelName::memdccp;
  return std::nullopt;
}

std::string scale_str(Scale scale) { return scale == Scale::full ? "full" : "desk"; }

std::optional<Scale> parse_scale(const std::string& scale) {
  if (scale == "full") return Scale::full;
  if (scale == "desk") return Scale::desk;
  return std::nullopt;
}

std::string ModelSpec::id() const {
  return scale == Scale::full ? model_name_str(name) : model_name_str(name) + "@desk";
}

ModelSpec build_model(ModelName name, Scale scale) {
  Architecture a;
  InputKind kind = InputKind::single_frame;
  switch (name) {
    case ModelName::pilotnet: a = pilotnet(scale); break;
    case ModelName::deepest_lstm_tiny_pilotnet: a = deepest_lstm_tiny(scale); break;
    case ModelName::pilotnet_x3:
      a = pilotnet_x3(scale);
      kind = InputKind::sequence_of_3;
      break;
    case ModelName::memdccp:
      a = memdccp(scale);
      kind = InputKind::sequence_of_3;
      break;
  }
  nn::Shape input = kind == InputKind::single_frame ? nn::Shape{a.height, a.width, 3}
                                                    : nn::Shape{kSequenceLength, a.height, a.width, 3};
  return ModelSpec{name, scale, kind, a.height, a.width, nn::Network(std::move(input), std::move(a.layers))};
}

ModelSpec build_model(const std::string& name, Scale scale) {
  const auto parsed = parse_model_name(name);
  if (!parsed) {
    fail(ErrorCode::invalid_argument,
         "unknown model '" + name + "' (expected pilotnet, deepest_lstm_tiny, pilotnet_x3 or memdccp)");
  }
  return build_model(*parsed, scale);
}

std::size_t param_count(const ModelSpec& spec) { return spec.network.param_count(); }

std::string model_manifest(const ModelSpec& spec) {
  std::ostringstream os;
  const auto& net = spec.network;
  os << "[" << spec.id() << "]\n";
  os << "input_kind = " << (spec.input_kind == InputKind::single_frame ? "single_frame" : "sequence_of_3") << "\n";
  os << "input_shape = " << nn::shape_str(net.input_shape()) << "\n";
  os << "param_count = " << net.param_count() << "\n";
  for (std::size_t i = 0; i < net.layers().size(); ++i) {
    const auto& l = net.layers()[i];
    os << "layer." << i << " = " << nn::kind_name(l.kind);
    if (l.kind == LayerKind::time_distributed) os << "(" << nn::kind_name(l.inner) << ")";
    const bool conv_like = l.kind == LayerKind::conv2d || l.kind == LayerKind::conv3d ||
                           l.kind == LayerKind::convlstm2d || l.kind == LayerKind::time_distributed;
    const bool pool = l.kind == LayerKind::maxpool2d || l.kind == LayerKind::maxpool3d ||
                      (l.kind == LayerKind::time_distributed && l.inner == LayerKind::maxpool2d);
    if (conv_like && !pool) {
      os << " filters=" << l.units << " kernel=" << l.kernel[0] << "x" << l.kernel[1] << "x" << l.kernel[2]
         << " stride=" << l.stride[0] << "x" << l.stride[1] << "x" << l.stride[2]
         << " padding=" << (l.padding == Padding::same ? "same" : "valid");
      if (l.kind == LayerKind::convlstm2d) os << " return_sequences=" << (l.return_sequences ? "true" : "false");
    } else if (pool) {
      os << " window=" << l.kernel[0] << "x" << l.kernel[1] << "x" << l.kernel[2] << " stride=" << l.stride[0] << "x"
         << l.stride[1] << "x" << l.stride[2];
    } else if (l.kind == LayerKind::dense) {
      os << " units=" << l.units;
    }
    os << " out=" << nn::shape_str(net.shapes()[i + 1]) << "\n";
  }
  return os.str();
}

ModelWeights init_weights(const ModelSpec& spec, std::uint64_t seed) {
  return ModelWeights{spec.id(), spec.network.init_params(seed)};
}

ModelWeights zero_weights(const ModelSpec& spec) { return ModelWeights{spec.id(), spec.network.zero_params()}; }

std::pair<double, double> forward_brain(const ModelSpec& spec, const ModelWeights& weights, const nn::Tensor& input) {
  const bool sequence = spec.input_kind == InputKind::sequence_of_3;
  if (sequence && input.rank() != 4) {
    fail(ErrorCode::invalid_argument, spec.id() + " consumes a 3-frame sequence [3,H,W,3], got " +
                                          nn::shape_str(input.shape()));
  }
  if (!sequence && input.rank() != 3) {
    fail(ErrorCode::invalid_argument, spec.id() + " consumes a single frame [H,W,3], got " +
                                          nn::shape_str(input.shape()));
  }
  const nn::Tensor out = spec.network.forward(weights.params, input);
  return {std::clamp(out[0], 0.0, 1.0), std::clamp(out[1], -1.0, 1.0)};
}

DriveCommand denormalize(double v_norm, double w_norm, const SpeedLimits& limits) {
  return DriveCommand{v_norm * limits.v_max, w_norm * limits.w_max};
}

std::pair<double, double> normalize(const DriveCommand& cmd, const SpeedLimits& limits) {
  return {cmd.v / limits.v_max, cmd.w / limits.w_max};
}

PreprocessSpec preprocess_spec(const ModelSpec& spec, std::size_t horizon_row) {
  return PreprocessSpec{horizon_row, spec.height, spec.width};
}

}  // namespace lr::models
