#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "laneracer/episode.hpp"

namespace lr::harness {

struct SuiteBrain {
  std::string name;
  std::function<std::unique_ptr<pilots::Brain>()> make;
};

struct Condition {
  std::string name;
  sim::TrackVariation variation;
  CameraOffset offset = CameraOffset::none;
  double offset_magnitude = 0.0;  // m
  double pitch_down = 0.0;        // rad
  double noise_p = 0.0;

  friend bool operator==(const Condition&, const Condition&) = default;
};

std::string camera_offset_str(CameraOffset o);
std::optional<CameraOffset> parse_camera_offset(const std::string& s);

// The six line/road/wall combinations, in table order.
std::vector<Condition> generalization_conditions();
// Camera left, right, rotated down, then salt-and-pepper noise 0.2, 0.4, 0.6.
std::vector<Condition> robustness_conditions(double offset_magnitude = kLateralOffsetMagnitude,
                                             double pitch_down = kPitchDownMagnitude);

struct SuiteCell {
  std::string brain;
  std::string condition;
  EpisodeMetrics mean;  // completed only if every repeat completed
  std::vector<EpisodeMetrics> runs;

  friend bool operator==(const SuiteCell&, const SuiteCell&) = default;
};

struct SuiteReport {
  std::string suite;  // "generalization" or "robustness"
  std::string circuit;
  int repeats = 3;
  std::vector<std::uint64_t> seeds;  // one per repeat
  std::vector<std::string> brains;
  std::vector<Condition> conditions;
  std::vector<SuiteCell> cells;  // brain-major, conditions in order

  const SuiteCell& cell(const std::string& brain, const std::string& condition) const;
  friend bool operator==(const SuiteReport&, const SuiteReport&) = default;
};

EpisodeMetrics average_metrics(const std::vector<EpisodeMetrics>& runs);

struct SuiteOptions {
  int repeats = 3;
  std::uint64_t seed = 0;
  EpisodeConfig base;  // camera, dt, limits; variation/noise come from the condition
};

EpisodeConfig condition_config(const EpisodeConfig& base, const Condition& c, std::uint64_t seed);

SuiteReport run_suite(const std::string& suite_name, const std::vector<SuiteBrain>& brains,
                      const sim::TrackSpec& circuit, const std::vector<Condition>& conditions,
                      const SuiteOptions& options);

SuiteReport generalization_suite(const std::vector<SuiteBrain>& brains, const sim::TrackSpec& circuit,
                                 const SuiteOptions& options = {});
SuiteReport robustness_suite(const std::vector<SuiteBrain>& brains, const sim::TrackSpec& circuit,
                             const SuiteOptions& options = {});

}  // namespace lr::harness
