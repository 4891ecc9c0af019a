#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>

#include "laneracer/dynamics.hpp"
#include "laneracer/pilots.hpp"
#include "laneracer/render.hpp"
#include "laneracer/track.hpp"

namespace lr::harness {

enum class FailureReason { none, off_track, line_lost_timeout, time_limit };

std::string failure_str(FailureReason r);
std::optional<FailureReason> parse_failure(const std::string& s);

struct EpisodeMetrics {
  bool completed = false;
  std::optional<double> lap_seconds;  // per lap
  double position_deviation_mae = 0.0;
  double average_speed = 0.0;
  FailureReason failure = FailureReason::none;
  double elapsed = 0.0;
  double path_length = 0.0;
  std::size_t ticks = 0;

  friend bool operator==(const EpisodeMetrics&, const EpisodeMetrics&) = default;
};

// 64x48 camera used for desk-scale recording and evaluation.
sim::CameraConfig desk_camera();

enum class CameraOffset { none, left, right };
inline constexpr double kLateralOffsetMagnitude = 0.5;  // m
inline constexpr double kPitchDownMagnitude = 0.15;     // rad

sim::CameraConfig perturbed_camera(sim::CameraConfig base, CameraOffset offset, double offset_magnitude,
                                   double pitch_down);

struct EpisodeConfig {
  sim::TrackVariation variation;
  sim::CameraConfig camera = desk_camera();
  double noise_p = 0.0;
  std::uint64_t seed = 0;
  std::optional<double> max_time;  // default 6 * length / v_min
  int laps = 1;
  double dt = 0.05;
  double lag_tau = 0.2;
  double v_min = 3.0;         // only used for the default max_time
  double t_lost = 2.0;        // line-loss tolerance for brains that report it
  double start_jitter = 0.2;  // m of lateral start offset drawn from the seed
  double off_track_margin = 1.0;
};

double default_max_time(const sim::TrackSpec& track, double v_min = 3.0);

struct Tick {
  std::size_t index;
  double time;                 // time at which the frame was taken
  const ImageFrame& frame;     // what the brain saw (after noise)
  const DriveCommand& command; // what it issued
  const sim::CarState& state;  // state the frame was rendered from
};

using TickObserver = std::function<void(const Tick&)>;

// Lap completion: the car crosses the start line forwards (progress > 0.75 to
// < 0.25) after visiting at least 95 of 100 arc bins.
inline constexpr std::size_t kLapBins = 100;
inline constexpr std::size_t kLapBinsRequired = 95;

EpisodeMetrics run_episode(pilots::Brain& brain, const sim::Renderer& renderer, const EpisodeConfig& config,
                           const TickObserver& observer = {});
EpisodeMetrics run_episode(pilots::Brain& brain, const sim::TrackSpec& track, const EpisodeConfig& config);

}  // namespace lr::harness
