#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "laneracer/episode.hpp"
#include "laneracer/pilots.hpp"
#include "laneracer/rng.hpp"
#include "laneracer/types.hpp"

namespace lr::data {

struct Sample {
  ImageFrame frame;  // raw render, not cropped
  double v = 0.0;    // command issued for this frame
  double w = 0.0;
  double t = 0.0;    // seconds since episode start
  std::uint32_t circuit_id = 0;  // index into the manifest's circuit list
  std::uint32_t episode_id = 0;
  std::uint32_t frame_index = 0;  // within the episode

  friend bool operator==(const Sample&, const Sample&) = default;
};

struct EpisodeInfo {
  std::uint32_t id = 0;
  std::uint32_t circuit_id = 0;
  std::uint64_t offset = 0;  // first sample
  std::uint64_t count = 0;

  friend bool operator==(const EpisodeInfo&, const EpisodeInfo&) = default;
};

inline constexpr std::uint32_t kDatasetVersion = 2;

struct DatasetManifest {
  std::uint32_t version = kDatasetVersion;
  std::uint64_t sample_count = 0;
  std::uint32_t width = 0;
  std::uint32_t height = 0;
  std::uint32_t horizon_row = 0;
  std::vector<std::string> circuits;
  std::vector<EpisodeInfo> episodes;
  SpeedLimits limits;

  friend bool operator==(const DatasetManifest& a, const DatasetManifest& b) {
    return a.version == b.version && a.sample_count == b.sample_count && a.width == b.width &&
           a.height == b.height && a.horizon_row == b.horizon_row && a.circuits == b.circuits &&
           a.episodes == b.episodes && a.limits.v_max == b.limits.v_max && a.limits.w_max == b.limits.w_max;
  }
};

struct Dataset {
  DatasetManifest manifest;
  std::vector<Sample> samples;

  std::size_t size() const { return samples.size(); }
  const EpisodeInfo& episode_of(std::size_t index) const;
  friend bool operator==(const Dataset&, const Dataset&) = default;
};

// Checks manifest/payload consistency; throws format errors.
void validate_dataset(const Dataset& ds);

struct RecordConfig {
  pilots::ExpertConfig expert;
  harness::EpisodeConfig episode;  // variation, camera, dt, seed...
};

// Drives the expert for `laps` laps and returns one sample per control tick.
// Throws a runtime error, keeping nothing, when the expert fails.
std::vector<Sample> record_episode(const sim::TrackSpec& circuit, const RecordConfig& config, int laps);

// Appends an episode recorded elsewhere; fixes ids and offsets.
void append_episode(Dataset& ds, const std::string& circuit, std::vector<Sample> samples);

// One episode per circuit, seeds derived from `seed`.
Dataset record_dataset(const std::vector<sim::TrackSpec>& circuits, int laps, std::uint64_t seed,
                       RecordConfig config = {});

ImageFrame mirror_frame(const ImageFrame& frame);
Sample mirror(const Sample& s);

struct AugmentParams {
  double brightness_lo = 0.8;
  double brightness_hi = 1.2;
  double jitter_sigma = 4.0;
};

// Brightness scale and per-channel Gaussian jitter; labels untouched.
ImageFrame augment_frame(const ImageFrame& frame, Rng& rng, const AugmentParams& params = {},
                         double* drawn_scale = nullptr);
Sample augment(const Sample& s, Rng& rng, const AugmentParams& params = {});

struct Split {
  std::vector<std::uint32_t> train;  // episode ids, ascending
  std::vector<std::uint32_t> val;
};

// Episode-level split; round(val_fraction * episodes) episodes (at least one) go to validation.
Split split(const DatasetManifest& manifest, double val_fraction, std::uint64_t seed);

// Sample indices belonging to the given episodes, in dataset order.
std::vector<std::size_t> sample_indices(const DatasetManifest& manifest, const std::vector<std::uint32_t>& episodes);

// Frames feeding sample i of a 3-frame model: (i-2, i-1, i), repeating the
// episode's first frame where the window would cross its start.
std::array<std::size_t, 3> sequence_window(const Dataset& ds, std::size_t index);

// LRDS container.
std::vector<std::uint8_t> encode_dataset(const Dataset& ds);
Dataset decode_dataset(const std::vector<std::uint8_t>& bytes);
void write_dataset(const Dataset& ds, const std::string& path);
Dataset read_dataset(const std::string& path);

// Portable pixmaps (frame_000000.ppm ...) plus labels.csv.
void export_dataset(const Dataset& ds, const std::string& dir);

inline constexpr std::size_t kChecksumChunk = std::size_t{64} << 20;

}  // namespace lr::data
