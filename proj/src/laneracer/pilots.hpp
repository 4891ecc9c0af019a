#pragma once

#include <deque>
#include <memory>
#include <optional>
#include <string>

#include "laneracer/models.hpp"
#include "laneracer/types.hpp"

namespace lr::pilots {

enum class TargetColor { red, white };

std::string target_color_str(TargetColor c);

inline constexpr int kDefaultColorTolerance = 20;
inline constexpr std::size_t kMinLinePixels = 10;

// Column centroid of pixels matching the target colour in the lower third of
// the image, as (centroid - W/2) / (W/2). Absent when fewer than 10 pixels match.
std::optional<double> detect_line_error(const ImageFrame& image, TargetColor target,
                                        int tolerance = kDefaultColorTolerance);

struct PidState {
  double kp = 2.2;
  double ki = 0.01;
  double kd = 1.2;
  double integral_clamp = 10.0;
  double output_limit = 3.0;  // |w| bound

  double integral = 0.0;
  double prev_error = 0.0;
  bool has_prev = false;  // first call has zero derivative

  void reset() {
    integral = 0.0;
    prev_error = 0.0;
    has_prev = false;
  }
};

// w = -(kp e + ki sum(e dt) + kd de/dt), clamped to +-output_limit.
double pid_step(PidState& pid, double error, double dt);

struct SpeedSchedule {
  double v_cruise = 10.0;
  double v_min = 3.0;
  double alpha = 0.6;
  double lost_decay_tau = 0.5;  // s, v relaxes toward v_min while the line is lost
  double t_lost = 2.0;          // s of line loss tolerated by the episode harness
};

double scheduled_speed(const SpeedSchedule& schedule, double error, const SpeedLimits& limits);

struct ExpertConfig {
  PidState pid;
  SpeedSchedule schedule;
  SpeedLimits limits;
  TargetColor target = TargetColor::red;
  int color_tolerance = kDefaultColorTolerance;
};

// Anything that turns camera frames into drive commands.
class Brain {
 public:
  virtual ~Brain() = default;
  virtual std::string name() const = 0;
  virtual void reset() = 0;
  virtual DriveCommand command(const ImageFrame& frame, double dt) = 0;
  // Seconds the line has been continuously missing; only the expert tracks it.
  virtual std::optional<double> line_lost_seconds() const { return std::nullopt; }
};

class ExpertPilot final : public Brain {
 public:
  explicit ExpertPilot(ExpertConfig config = {});
  std::string name() const override { return "expert"; }
  void reset() override;
  DriveCommand command(const ImageFrame& frame, double dt) override;
  std::optional<double> line_lost_seconds() const override { return lost_; }
  const ExpertConfig& config() const { return config_; }

 private:
  ExpertConfig config_;
  DriveCommand last_{};
  double lost_ = 0.0;
};

// The last three preprocessed frames, oldest first. The first push fills all slots.
class SequenceBuffer {
 public:
  void push(const nn::Tensor& frame);
  void clear() { frames_.clear(); }
  bool empty() const { return frames_.empty(); }
  std::size_t size() const { return frames_.size(); }
  const nn::Tensor& at(std::size_t i) const { return frames_.at(i); }
  const nn::Tensor& newest() const { return frames_.back(); }
  nn::Tensor stacked() const;  // [3, H, W, C]

 private:
  std::deque<nn::Tensor> frames_;
};

class NeuralPilot final : public Brain {
 public:
  // crop_row fixes the preprocessing crop (the training camera's horizon) so a
  // moved camera is not silently compensated; absent = use each frame's horizon.
  NeuralPilot(std::shared_ptr<const models::ModelSpec> spec, std::shared_ptr<const models::ModelWeights> weights,
              SpeedLimits limits = {}, std::optional<std::size_t> crop_row = std::nullopt);
  std::string name() const override;
  void reset() override { buffer_.clear(); }
  DriveCommand command(const ImageFrame& frame, double dt) override;
  // Same as command() but for an already preprocessed frame.
  DriveCommand command_preprocessed(const nn::Tensor& frame);
  const SequenceBuffer& buffer() const { return buffer_; }

 private:
  std::shared_ptr<const models::ModelSpec> spec_;
  std::shared_ptr<const models::ModelWeights> weights_;
  SpeedLimits limits_;
  std::optional<std::size_t> crop_row_;
  SequenceBuffer buffer_;
};

}  // namespace lr::pilots
