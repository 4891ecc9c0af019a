#include "laneracer/binary_io.hpp"
#include "laneracer/error.hpp"
#include "laneracer/models.hpp"

namespace lr::models {

namespace {
constexpr char kMagic[5] = "LRWT";
}

std::vector<std::uint8_t> encode_weights(const ModelSpec& spec, const ModelWeights& weights) {
  spec.network.check_params(weights.params);
  const auto& infos = spec.network.params();
  bin::Writer w;
  w.magic(kMagic);
  w.u32(kWeightsVersion);
  w.str(spec.id());
  w.u32(static_cast<std::uint32_t>(infos.size()));
  for (std::size_t i = 0; i < infos.size(); ++i) {
    w.str(infos[i].name);
    w.u32(static_cast<std::uint32_t>(infos[i].shape.size()));
    for (auto d : infos[i].shape) w.u32(static_cast<std::uint32_t>(d));
    for (double v : weights.params[i].data()) w.f64(v);
  }
  return std::move(w.buffer());
}

ModelWeights decode_weights(const ModelSpec& spec, const std::vector<std::uint8_t>& bytes) {
  bin::Reader r(bytes.data(), bytes.size(), "weights");
  if (!r.magic(kMagic)) fail(ErrorCode::format, "weights: bad magic, not an LRWT file");
  const std::uint32_t version = r.u32();
  if (version != kWeightsVersion) {
    fail(ErrorCode::version, "weights: file version " + std::to_string(version) + ", reader supports " +
                                 std::to_string(kWeightsVersion));
  }
  const std::string id = r.str();
  if (id != spec.id()) {
    fail(ErrorCode::shape_mismatch, "weights: file holds model '" + id + "' but '" + spec.id() + "' was requested");
  }
  const auto& infos = spec.network.params();
  const std::uint32_t count = r.u32();
  if (count != infos.size()) {
    fail(ErrorCode::shape_mismatch, "weights: file has " + std::to_string(count) + " parameters, model expects " +
                                        std::to_string(infos.size()));
  }
  ModelWeights out{id, {}};
  out.params.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::string name = r.str();
    if (name != infos[i].name) {
      fail(ErrorCode::shape_mismatch, "weights: parameter " + std::to_string(i) + " is '" + name + "', expected '" +
                                          infos[i].name + "'");
    }
    const std::uint32_t rank = r.u32();
    if (rank == 0 || rank > nn::kMaxRank) fail(ErrorCode::format, "weights: invalid rank for " + name);
    nn::Shape shape(rank);
    for (auto& d : shape) d = r.u32();
    if (shape != infos[i].shape) {
      fail(ErrorCode::shape_mismatch, "weights: " + name + " has shape " + nn::shape_str(shape) + ", expected " +
                                          nn::shape_str(infos[i].shape));
    }
    nn::Tensor t(shape);
    r.need(8 * t.size());
    for (auto& v : t.data()) v = r.f64();
    out.params.push_back(std::move(t));
  }
  if (r.remaining() != 0) fail(ErrorCode::format, "weights: trailing bytes after the last parameter");
  return out;
}

void save_weights(const ModelSpec& spec, const ModelWeights& weights, const std::string& path) {
  bin::write_file(path, encode_weights(spec, weights));
}

ModelWeights load_weights(const ModelSpec& spec, const std::string& path) {
  return decode_weights(spec, bin::read_file(path));
}

}  // namespace lr::models
