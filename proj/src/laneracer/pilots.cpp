#include "laneracer/pilots.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>

#include "laneracer/error.hpp"

namespace lr::pilots {

std::string target_color_str(TargetColor c) { return c == TargetColor::red ? "red" : "white"; }

std::optional<double> detect_line_error(const ImageFrame& image, TargetColor target, int tolerance) {
  if (image.width == 0 || image.height == 0) return std::nullopt;
  const Rgb want = target == TargetColor::red ? Rgb{230, 20, 20} : Rgb{255, 255, 255};
  auto near = [tolerance](std::uint8_t a, std::uint8_t b) { return std::abs(int(a) - int(b)) <= tolerance; };
  const std::size_t first_row = image.height - image.height / 3;
  double sum = 0.0;
  std::size_t count = 0;
  for (std::size_t y = first_row; y < image.height; ++y) {
    for (std::size_t x = 0; x < image.width; ++x) {
      const Rgb p = image.pixel(x, y);
      if (near(p.r, want.r) && near(p.g, want.g) && near(p.b, want.b)) {
        sum += static_cast<double>(x) + 0.5;
        ++count;
      }
    }
  }
  if (count < kMinLinePixels) return std::nullopt;
  const double half = 0.5 * static_cast<double>(image.width);
  return std::clamp((sum / static_cast<double>(count) - half) / half, -1.0, 1.0);
}

double pid_step(PidState& pid, double error, double dt) {
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "pid_step: dt must be positive");
  pid.integral = std::clamp(pid.integral + error * dt, -pid.integral_clamp, pid.integral_clamp);
  const double derivative = pid.has_prev ? (error - pid.prev_error) / dt : 0.0;
  pid.prev_error = error;
  pid.has_prev = true;
  const double w = -(pid.kp * error + pid.ki * pid.integral + pid.kd * derivative);
  return std::clamp(w, -pid.output_limit, pid.output_limit);
}

double scheduled_speed(const SpeedSchedule& s, double error, const SpeedLimits& limits) {
  const double v = std::max(s.v_min, s.v_cruise * (1.0 - s.alpha * std::abs(error)));
  return std::clamp(v, 0.0, limits.v_max);
}

ExpertPilot::ExpertPilot(ExpertConfig config) : config_(config) {
  config_.pid.output_limit = std::min(config_.pid.output_limit, config_.limits.w_max);
  reset();
}

void ExpertPilot::reset() {
  config_.pid.reset();
  last_ = {};
  lost_ = 0.0;
}

DriveCommand ExpertPilot::command(const ImageFrame& frame, double dt) {
  const auto err = detect_line_error(frame, config_.target, config_.color_tolerance);
  if (err) {
    lost_ = 0.0;
    last_ = {scheduled_speed(config_.schedule, *err, config_.limits), pid_step(config_.pid, *err, dt)};
    return last_;
  }
  // Recovery: keep turning as before, slow down.
  lost_ += dt;
  const double v_min = std::min(config_.schedule.v_min, config_.limits.v_max);
  const double k = 1.0 - std::exp(-dt / config_.schedule.lost_decay_tau);
  last_.v = std::clamp(last_.v + (v_min - last_.v) * k, 0.0, config_.limits.v_max);
  return last_;
}

void SequenceBuffer::push(const nn::Tensor& frame) {
  if (!frames_.empty() && frame.shape() != frames_.back().shape()) {
    fail(ErrorCode::shape_mismatch, "sequence buffer: frame shape " + nn::shape_str(frame.shape()) +
                                        " differs from buffered " + nn::shape_str(frames_.back().shape()));
  }
  if (frames_.empty()) {
    frames_.assign(models::kSequenceLength, frame);
    return;
  }
  frames_.pop_front();
  frames_.push_back(frame);
}

nn::Tensor SequenceBuffer::stacked() const {
  if (frames_.empty()) fail(ErrorCode::runtime, "sequence buffer is empty");
  nn::Shape shape{frames_.size()};
  for (std::size_t d : frames_.front().shape()) shape.push_back(d);
  nn::Tensor out(shape);
  const std::size_t n = frames_.front().size();
  for (std::size_t i = 0; i < frames_.size(); ++i) std::copy_n(frames_[i].ptr(), n, out.ptr() + i * n);
  return out;
}

NeuralPilot::NeuralPilot(std::shared_ptr<const models::ModelSpec> spec,
                         std::shared_ptr<const models::ModelWeights> weights, SpeedLimits limits,
                         std::optional<std::size_t> crop_row)
    : spec_(std::move(spec)), weights_(std::move(weights)), limits_(limits), crop_row_(crop_row) {
  if (!spec_ || !weights_) fail(ErrorCode::invalid_argument, "neural pilot: missing model or weights");
  spec_->network.check_params(weights_->params);
}

std::string NeuralPilot::name() const { return models::model_name_str(spec_->name); }

DriveCommand NeuralPilot::command_preprocessed(const nn::Tensor& frame) {
  buffer_.push(frame);
  const bool single = spec_->input_kind == models::InputKind::single_frame;
  const auto [v_norm, w_norm] = models::forward_brain(*spec_, *weights_, single ? buffer_.newest() : buffer_.stacked());
  return models::denormalize(v_norm, w_norm, limits_);
}

DriveCommand NeuralPilot::command(const ImageFrame& frame, double /*dt*/) {
  return command_preprocessed(models::preprocess(frame, models::preprocess_spec(*spec_, crop_row_.value_or(frame.horizon_row))));
}

}  // namespace lr::pilots
