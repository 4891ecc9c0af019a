#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>

#include "laneracer/network.hpp"
#include "laneracer/types.hpp"

namespace lr::models {

enum class ModelName { pilotnet, deepest_lstm_tiny_pilotnet, pilotnet_x3, memdccp };
enum class InputKind { single_frame, sequence_of_3 };

// full: 66x200 and 50x100 inputs.
// desk: the same layer vocabulary shrunk for CPU training on 64x48 renders.
enum class Scale { full, desk };

inline constexpr std::size_t kSequenceLength = 3;

std::string model_name_str(ModelName name);
std::optional<ModelName> parse_model_name(const std::string& name);
std::string scale_str(Scale scale);
std::optional<Scale> parse_scale(const std::string& scale);

struct ModelSpec {
  ModelName name;
  Scale scale;
  InputKind input_kind;
  std::size_t height;  // per-frame input after preprocessing
  std::size_t width;
  nn::Network network;

  // "memdccp" at full scale, "memdccp@desk" otherwise. Recorded in weight files.
  std::string id() const;
  nn::Shape frame_shape() const { return {height, width, 3}; }
};

ModelSpec build_model(ModelName name, Scale scale = Scale::full);
ModelSpec build_model(const std::string& name, Scale scale = Scale::full);

std::size_t param_count(const ModelSpec& spec);

// Human-readable key=value listing of every layer's hyperparameters.
std::string model_manifest(const ModelSpec& spec);

struct ModelWeights {
  std::string spec_id;
  nn::ParamSet params;  // aligned with spec.network.params()
};

ModelWeights init_weights(const ModelSpec& spec, std::uint64_t seed);
ModelWeights zero_weights(const ModelSpec& spec);

// Returns (v_norm, w_norm) in [0,1] x [-1,1]. `input` is one preprocessed frame
// [H,W,3] for single-frame models or [3,H,W,3] oldest-to-newest otherwise.
std::pair<double, double> forward_brain(const ModelSpec& spec, const ModelWeights& weights, const nn::Tensor& input);

DriveCommand denormalize(double v_norm, double w_norm, const SpeedLimits& limits);
std::pair<double, double> normalize(const DriveCommand& cmd, const SpeedLimits& limits);

struct PreprocessSpec {
  std::size_t horizon_row = 0;  // rows above are discarded
  std::size_t height = 0;       // target size
  std::size_t width = 0;
};

PreprocessSpec preprocess_spec(const ModelSpec& spec, std::size_t horizon_row);

// Crop above the horizon, bilinear resize (half-pixel centres), scale to [0,1].
nn::Tensor preprocess(const ImageFrame& image, const PreprocessSpec& spec);

// Weight file: "LRWT", u32 version, spec id, u32 parameter count, then per
// parameter its name, u32 rank, u32 dims and raw little-endian f64 values.
inline constexpr std::uint32_t kWeightsVersion = 1;

void save_weights(const ModelSpec& spec, const ModelWeights& weights, const std::string& path);
ModelWeights load_weights(const ModelSpec& spec, const std::string& path);
std::vector<std::uint8_t> encode_weights(const ModelSpec& spec, const ModelWeights& weights);
ModelWeights decode_weights(const ModelSpec& spec, const std::vector<std::uint8_t>& bytes);

}  // namespace lr::models
