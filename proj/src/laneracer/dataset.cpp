#include "laneracer/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "laneracer/error.hpp"

namespace lr::data {

const EpisodeInfo& Dataset::episode_of(std::size_t index) const {
  for (const auto& e : manifest.episodes) {
    if (index >= e.offset && index < e.offset + e.count) return e;
  }
  fail(ErrorCode::invalid_argument, "dataset: sample " + std::to_string(index) + " is outside every episode");
}

void validate_dataset(const Dataset& ds) {
  const auto& m = ds.manifest;
  if (m.sample_count != ds.samples.size()) {
    fail(ErrorCode::format, "dataset: manifest lists " + std::to_string(m.sample_count) + " samples but payload holds " +
                                std::to_string(ds.samples.size()));
  }
  std::uint64_t next = 0;
  for (std::size_t k = 0; k < m.episodes.size(); ++k) {
    const auto& e = m.episodes[k];
    if (e.offset != next || e.count == 0) fail(ErrorCode::format, "dataset: episode offsets are not contiguous and increasing");
    if (e.circuit_id >= m.circuits.size()) fail(ErrorCode::format, "dataset: episode refers to an unknown circuit");
    if (e.id != k) fail(ErrorCode::format, "dataset: episode ids must be 0..n-1 in order");
    next += e.count;
  }
  if (next != m.sample_count) fail(ErrorCode::format, "dataset: episodes do not cover every sample");
  for (const auto& e : m.episodes) {
    for (std::uint64_t i = 0; i < e.count; ++i) {
      const Sample& s = ds.samples[e.offset + i];
      if (s.episode_id != e.id || s.circuit_id != e.circuit_id || s.frame_index != i) {
        fail(ErrorCode::format, "dataset: sample " + std::to_string(e.offset + i) + " disagrees with its episode entry");
      }
      if (s.frame.width != m.width || s.frame.height != m.height || s.frame.rgb.size() != 3ull * m.width * m.height) {
        fail(ErrorCode::format, "dataset: sample " + std::to_string(e.offset + i) + " has the wrong image size");
      }
    }
  }
}

std::vector<Sample> record_episode(const sim::TrackSpec& circuit, const RecordConfig& config, int laps) {
  pilots::ExpertPilot expert(config.expert);
  harness::EpisodeConfig ep = config.episode;
  ep.laps = laps;
  ep.v_min = config.expert.schedule.v_min;
  ep.t_lost = config.expert.schedule.t_lost;
  std::vector<Sample> out;
  const auto metrics = harness::run_episode(expert, sim::Renderer(circuit), ep, [&](const harness::Tick& tick) {
    Sample s;
    s.frame = tick.frame;
    s.v = tick.command.v;
    s.w = tick.command.w;
    s.t = tick.time;
    s.frame_index = static_cast<std::uint32_t>(tick.index);
    out.push_back(std::move(s));
  });
  if (!metrics.completed) {
    fail(ErrorCode::runtime, "recording on '" + circuit.name + "' aborted: expert failed (" +
                                 harness::failure_str(metrics.failure) + ")");
  }
  return out;
}

void append_episode(Dataset& ds, const std::string& circuit, std::vector<Sample> samples) {
  if (samples.empty()) fail(ErrorCode::invalid_argument, "dataset: cannot append an empty episode");
  auto& m = ds.manifest;
  const ImageFrame& f0 = samples.front().frame;
  if (ds.samples.empty()) {
    m.width = static_cast<std::uint32_t>(f0.width);
    m.height = static_cast<std::uint32_t>(f0.height);
    m.horizon_row = static_cast<std::uint32_t>(f0.horizon_row);
  }
  auto it = std::find(m.circuits.begin(), m.circuits.end(), circuit);
  const auto circuit_id = static_cast<std::uint32_t>(it - m.circuits.begin());
  if (it == m.circuits.end()) m.circuits.push_back(circuit);
  EpisodeInfo e{static_cast<std::uint32_t>(m.episodes.size()), circuit_id, ds.samples.size(), samples.size()};
  for (std::size_t i = 0; i < samples.size(); ++i) {
    Sample& s = samples[i];
    if (s.frame.width != m.width || s.frame.height != m.height) {
      fail(ErrorCode::shape_mismatch, "dataset: frame size differs from the dataset's");
    }
    if (!std::isfinite(s.v) || !std::isfinite(s.w) || !std::isfinite(s.t)) fail(ErrorCode::numeric, "dataset: non-finite label");
    s.circuit_id = circuit_id;
    s.episode_id = e.id;
    s.frame_index = static_cast<std::uint32_t>(i);
    ds.samples.push_back(std::move(s));
  }
  m.episodes.push_back(e);
  m.sample_count = ds.samples.size();
}

Dataset record_dataset(const std::vector<sim::TrackSpec>& circuits, int laps, std::uint64_t seed, RecordConfig config) {
  if (circuits.empty()) fail(ErrorCode::invalid_argument, "dataset: no circuits to record");
  if (laps < 1) fail(ErrorCode::invalid_argument, "dataset: laps must be >= 1");
  Dataset ds;
  ds.manifest.limits = config.expert.limits;
  for (std::size_t i = 0; i < circuits.size(); ++i) {
    config.episode.seed = derive_seed(seed, i);
    append_episode(ds, circuits[i].name, record_episode(circuits[i], config, laps));
  }
  return ds;
}

ImageFrame mirror_frame(const ImageFrame& frame) {
  ImageFrame out = frame;
  for (std::size_t y = 0; y < frame.height; ++y)
    for (std::size_t x = 0; x < frame.width; ++x) out.set_pixel(frame.width - 1 - x, y, frame.pixel(x, y));
  return out;
}

Sample mirror(const Sample& s) {
  Sample out = s;
  out.frame = mirror_frame(s.frame);
  out.w = -s.w;
  return out;
}

ImageFrame augment_frame(const ImageFrame& frame, Rng& rng, const AugmentParams& p, double* drawn_scale) {
  const double scale = rng.uniform(p.brightness_lo, p.brightness_hi);
  if (drawn_scale) *drawn_scale = scale;
  ImageFrame out = frame;
  for (auto& b : out.rgb) {
    const double v = static_cast<double>(b) * scale + p.jitter_sigma * rng.normal();
    b = static_cast<std::uint8_t>(std::clamp(std::round(v), 0.0, 255.0));
  }
  return out;
}

Sample augment(const Sample& s, Rng& rng, const AugmentParams& params) {
  Sample out = s;
  out.frame = augment_frame(s.frame, rng, params);
  return out;
}

Split split(const DatasetManifest& m, double val_fraction, std::uint64_t seed) {
  if (!(val_fraction > 0.0 && val_fraction < 1.0)) fail(ErrorCode::invalid_argument, "split: val_fraction must lie in (0, 1)");
  const std::size_t n = m.episodes.size();
  if (n < 2) fail(ErrorCode::invalid_argument, "split: need at least 2 episodes, dataset has " + std::to_string(n));
  std::vector<std::uint32_t> ids(n);
  std::iota(ids.begin(), ids.end(), 0u);
  // Fisher-Yates with the explicit RNG mapping.
  Rng rng(derive_seed(seed, 0x5917));
  for (std::size_t i = n - 1; i > 0; --i) std::swap(ids[i], ids[rng.below(i + 1)]);
  const auto n_val = std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(val_fraction * n)), 1, n - 1);
  Split s;
  s.val.assign(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(n_val));
  s.train.assign(ids.begin() + static_cast<std::ptrdiff_t>(n_val), ids.end());
  std::sort(s.val.begin(), s.val.end());
  std::sort(s.train.begin(), s.train.end());
  return s;
}

std::vector<std::size_t> sample_indices(const DatasetManifest& m, const std::vector<std::uint32_t>& episodes) {
  std::vector<std::uint32_t> sorted = episodes;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> out;
  for (auto id : sorted) {
    if (id >= m.episodes.size()) fail(ErrorCode::invalid_argument, "dataset: unknown episode " + std::to_string(id));
    const auto& e = m.episodes[id];
    for (std::uint64_t i = 0; i < e.count; ++i) out.push_back(e.offset + i);
  }
  return out;
}

std::array<std::size_t, 3> sequence_window(const Dataset& ds, std::size_t index) {
  if (index >= ds.samples.size()) fail(ErrorCode::invalid_argument, "dataset: sample index out of range");
  const std::size_t start = index - ds.samples[index].frame_index;
  auto back = [&](std::size_t k) { return index >= start + k ? index - k : start; };
  return {back(2), back(1), index};
}

}  // namespace lr::data
