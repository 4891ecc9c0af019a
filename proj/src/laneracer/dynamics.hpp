#pragma once

#include "laneracer/types.hpp"

namespace lr::sim {

struct CarState {
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;  // radians, (-pi, pi]
  double v = 0.0;        // m/s
  double w = 0.0;        // rad/s
  double time = 0.0;     // s

  friend bool operator==(const CarState&, const CarState&) = default;
};

double normalize_angle(double a);

// Unicycle step. Actual speeds follow the command through a first-order lag
// with time constant `lag_tau` (0 = immediate); the pose then advances along
// the exact circular arc for constant (v, w) over dt.
CarState step_dynamics(const CarState& state, const DriveCommand& cmd, double dt, double lag_tau);

}  // namespace lr::sim
