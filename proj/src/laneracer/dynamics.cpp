#include "laneracer/dynamics.hpp"

#include <cmath>
#include <numbers>

#include "laneracer/error.hpp"

namespace lr::sim {

double normalize_angle(double a) {
  constexpr double two_pi = 2.0 * std::numbers::pi;
  a = std::fmod(a, two_pi);
  if (a <= -std::numbers::pi) a += two_pi;
  if (a > std::numbers::pi) a -= two_pi;
  return a;
}

CarState step_dynamics(const CarState& state, const DriveCommand& cmd, double dt, double lag_tau) {
  if (!(dt > 0.0)) fail(ErrorCode::invalid_argument, "step_dynamics: dt must be positive");
  if (lag_tau < 0.0) fail(ErrorCode::invalid_argument, "step_dynamics: lag time constant must be >= 0");
  CarState next = state;
  const double blend = lag_tau > 0.0 ? 1.0 - std::exp(-dt / lag_tau) : 1.0;
  next.v = state.v + (cmd.v - state.v) * blend;
  next.w = state.w + (cmd.w - state.w) * blend;

  const double turn = next.w * dt;
  // Chord of the arc: 2 (v / w) sin(w dt / 2), along the mid-step heading.
  const double chord = std::abs(turn) > 1e-12 ? 2.0 * next.v / next.w * std::sin(0.5 * turn) : next.v * dt;
  const double mid = state.heading + 0.5 * turn;
  next.x = state.x + chord * std::cos(mid);
  next.y = state.y + chord * std::sin(mid);
  next.heading = normalize_angle(state.heading + turn);
  next.time = state.time + dt;
  return next;
}

}  // namespace lr::sim
