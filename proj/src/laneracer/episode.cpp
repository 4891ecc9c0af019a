#include "laneracer/episode.hpp"

#include <cmath>
#include <vector>

#include "laneracer/error.hpp"
#include "laneracer/rng.hpp"

namespace lr::harness {

std::string failure_str(FailureReason r) {
  switch (r) {
    case FailureReason::none: return "none";
    case FailureReason::off_track: return "off_track";
    case FailureReason::line_lost_timeout: return "line_lost_timeout";
    case FailureReason::time_limit: return "time_limit";
  }
  return "none";
}

std::optional<FailureReason> parse_failure(const std::string& s) {
  for (auto r : {FailureReason::none, FailureReason::off_track, FailureReason::line_lost_timeout,
                 FailureReason::time_limit}) {
    if (failure_str(r) == s) return r;
  }
  return std::nullopt;
}

sim::CameraConfig desk_camera() {
  sim::CameraConfig c;
  c.width = 64;
  c.height_px = 48;
  return c;
}

sim::CameraConfig perturbed_camera(sim::CameraConfig base, CameraOffset offset, double offset_magnitude,
                                   double pitch_down) {
  if (offset == CameraOffset::left) base.lateral_offset -= offset_magnitude;
  if (offset == CameraOffset::right) base.lateral_offset += offset_magnitude;
  base.extra_pitch_down += pitch_down;
  return base;
}

double default_max_time(const sim::TrackSpec& track, double v_min) {
  return 6.0 * sim::TrackGeometry(track).length() / v_min;
}

EpisodeMetrics run_episode(pilots::Brain& brain, const sim::Renderer& renderer, const EpisodeConfig& cfg,
                           const TickObserver& observer) {
  if (!(cfg.dt > 0.0)) fail(ErrorCode::invalid_argument, "episode: dt must be positive");
  if (cfg.laps < 1) fail(ErrorCode::invalid_argument, "episode: laps must be >= 1");
  if (!(cfg.noise_p >= 0.0 && cfg.noise_p <= 1.0)) fail(ErrorCode::invalid_argument, "episode: noise must lie in [0, 1]");
  sim::validate_camera(cfg.camera);
  const sim::TrackGeometry& geo = renderer.geometry();
  const sim::TrackSpec& track = geo.track();
  const double max_time = cfg.max_time.value_or(6.0 * geo.length() / cfg.v_min);
  const double off_limit = 0.5 * track.road_width + cfg.off_track_margin;

  brain.reset();
  Rng rng(derive_seed(cfg.seed, 0));
  const double jitter = cfg.start_jitter > 0.0 ? rng.uniform(-cfg.start_jitter, cfg.start_jitter) : 0.0;
  const sim::Vec2 p0 = geo.point_at(0.0);
  const double h0 = geo.heading_at(0.0);
  // Left normal of the driving direction.
  sim::CarState state{p0.x - jitter * std::sin(h0), p0.y + jitter * std::cos(h0), h0, 0.0, 0.0, 0.0};
  const std::uint64_t noise_seed = derive_seed(cfg.seed, 1);

  EpisodeMetrics m;
  m.failure = FailureReason::time_limit;
  std::vector<bool> bins(kLapBins, false);
  std::size_t bins_seen = 0;
  double progress = geo.progress({state.x, state.y});
  int laps_done = 0;
  double deviation_sum = 0.0;

  while (state.time < max_time - 1e-9) {
    ImageFrame frame = renderer.render(cfg.variation, state, cfg.camera);
    if (cfg.noise_p > 0.0) frame = sim::salt_pepper(frame, cfg.noise_p, derive_seed(noise_seed, m.ticks));
    const DriveCommand cmd = brain.command(frame, cfg.dt);
    if (observer) observer(Tick{m.ticks, state.time, frame, cmd, state});

    const sim::CarState next = sim::step_dynamics(state, cmd, cfg.dt, cfg.lag_tau);
    m.path_length += std::hypot(next.x - state.x, next.y - state.y);
    state = next;
    ++m.ticks;

    const auto near = geo.nearest({state.x, state.y});
    deviation_sum += near.distance;
    if (near.distance > off_limit) {
      m.failure = FailureReason::off_track;
      break;
    }
    const auto lost = brain.line_lost_seconds();
    if (lost && *lost > cfg.t_lost) {
      m.failure = FailureReason::line_lost_timeout;
      break;
    }
    const double now = near.arc / geo.length();
    const auto bin = std::min(kLapBins - 1, static_cast<std::size_t>(now * kLapBins));
    if (!bins[bin]) {
      bins[bin] = true;
      ++bins_seen;
    }
    if (progress > 0.75 && now < 0.25 && bins_seen >= kLapBinsRequired) {
      ++laps_done;
      bins.assign(kLapBins, false);
      bins_seen = 0;
      if (laps_done == cfg.laps) {
        m.completed = true;
        m.failure = FailureReason::none;
        progress = now;
        break;
      }
    }
    progress = now;
  }

  m.elapsed = state.time;
  m.position_deviation_mae = m.ticks > 0 ? deviation_sum / static_cast<double>(m.ticks) : 0.0;
  m.average_speed = m.elapsed > 0.0 ? m.path_length / m.elapsed : 0.0;
  if (m.completed) m.lap_seconds = m.elapsed / cfg.laps;
  return m;
}

EpisodeMetrics run_episode(pilots::Brain& brain, const sim::TrackSpec& track, const EpisodeConfig& config) {
  return run_episode(brain, sim::Renderer(track), config);
}

}  // namespace lr::harness
