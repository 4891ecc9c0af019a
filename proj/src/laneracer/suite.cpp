#include "laneracer/suite.hpp"

#include "laneracer/error.hpp"
#include "laneracer/rng.hpp"

namespace lr::harness {

std::string camera_offset_str(CameraOffset o) {
  switch (o) {
    case CameraOffset::none: return "none";
    case CameraOffset::left: return "left";
    case CameraOffset::right: return "right";
  }
  return "none";
}

std::optional<CameraOffset> parse_camera_offset(const std::string& s) {
  if (s == "none") return CameraOffset::none;
  if (s == "left") return CameraOffset::left;
  if (s == "right") return CameraOffset::right;
  return std::nullopt;
}

std::vector<Condition> generalization_conditions() {
  using sim::LineColor;
  using sim::RoadColor;
  std::vector<Condition> out;
  for (auto v : {sim::TrackVariation{LineColor::red, RoadColor::grey, true},
                 sim::TrackVariation{LineColor::red, RoadColor::white, true},
                 sim::TrackVariation{LineColor::white, RoadColor::grey, true},
                 sim::TrackVariation{LineColor::none, RoadColor::grey, true},
                 sim::TrackVariation{LineColor::none, RoadColor::white, true},
                 sim::TrackVariation{LineColor::none, RoadColor::grey, false}}) {
    Condition c;
    c.name = sim::variation_str(v);
    c.variation = v;
    out.push_back(c);
  }
  return out;
}

std::vector<Condition> robustness_conditions(double offset_magnitude, double pitch_down) {
  std::vector<Condition> out;
  Condition left;
  left.name = "camera_left";
  left.offset = CameraOffset::left;
  left.offset_magnitude = offset_magnitude;
  out.push_back(left);
  Condition right = left;
  right.name = "camera_right";
  right.offset = CameraOffset::right;
  out.push_back(right);
  Condition down;
  down.name = "camera_down";
  down.pitch_down = pitch_down;
  out.push_back(down);
  for (double p : {0.2, 0.4, 0.6}) {
    Condition n;
    char buf[32];
    std::snprintf(buf, sizeof buf, "noise_%.1f", p);
    n.name = buf;
    n.noise_p = p;
    out.push_back(n);
  }
  return out;
}

const SuiteCell& SuiteReport::cell(const std::string& brain, const std::string& condition) const {
  for (const auto& c : cells) {
    if (c.brain == brain && c.condition == condition) return c;
  }
  fail(ErrorCode::invalid_argument, "suite report has no cell (" + brain + ", " + condition + ")");
}

EpisodeMetrics average_metrics(const std::vector<EpisodeMetrics>& runs) {
  if (runs.empty()) fail(ErrorCode::invalid_argument, "average_metrics: no runs");
  EpisodeMetrics m;
  m.completed = true;
  double lap = 0.0;
  const double n = static_cast<double>(runs.size());
  for (const auto& r : runs) {
    m.completed = m.completed && r.completed;
    if (r.lap_seconds) lap += *r.lap_seconds;
    m.position_deviation_mae += r.position_deviation_mae / n;
    m.average_speed += r.average_speed / n;
    m.elapsed += r.elapsed / n;
    m.path_length += r.path_length / n;
    m.ticks += r.ticks;
    if (!r.completed && m.failure == FailureReason::none) m.failure = r.failure;
  }
  m.ticks /= runs.size();
  if (m.completed) m.lap_seconds = lap / n;
  return m;
}

EpisodeConfig condition_config(const EpisodeConfig& base, const Condition& c, std::uint64_t seed) {
  EpisodeConfig cfg = base;
  cfg.variation = c.variation;
  cfg.camera = perturbed_camera(base.camera, c.offset, c.offset_magnitude, c.pitch_down);
  cfg.noise_p = c.noise_p;
  cfg.seed = seed;
  return cfg;
}

SuiteReport run_suite(const std::string& suite_name, const std::vector<SuiteBrain>& brains,
                      const sim::TrackSpec& circuit, const std::vector<Condition>& conditions,
                      const SuiteOptions& options) {
  if (options.repeats < 1) fail(ErrorCode::invalid_argument, "suite: repeats must be >= 1");
  if (brains.empty()) fail(ErrorCode::invalid_argument, "suite: no brains given");
  SuiteReport rep;
  rep.suite = suite_name;
  rep.circuit = circuit.name;
  rep.repeats = options.repeats;
  rep.conditions = conditions;
  for (int r = 0; r < options.repeats; ++r) rep.seeds.push_back(derive_seed(options.seed, static_cast<std::uint64_t>(r)));
  const sim::Renderer renderer(circuit);
  for (const auto& b : brains) {
    rep.brains.push_back(b.name);
    for (const auto& c : conditions) {
      SuiteCell cell;
      cell.brain = b.name;
      cell.condition = c.name;
      for (std::uint64_t seed : rep.seeds) {
        auto brain = b.make();
        cell.runs.push_back(run_episode(*brain, renderer, condition_config(options.base, c, seed)));
      }
      cell.mean = average_metrics(cell.runs);
      rep.cells.push_back(std::move(cell));
    }
  }
  return rep;
}

SuiteReport generalization_suite(const std::vector<SuiteBrain>& brains, const sim::TrackSpec& circuit,
                                 const SuiteOptions& options) {
  return run_suite("generalization", brains, circuit, generalization_conditions(), options);
}

SuiteReport robustness_suite(const std::vector<SuiteBrain>& brains, const sim::TrackSpec& circuit,
                             const SuiteOptions& options) {
  return run_suite("robustness", brains, circuit, robustness_conditions(), options);
}

}  // namespace lr::harness
