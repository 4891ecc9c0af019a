#pragma once

#include <cstdint>
#include <vector>

#include "laneracer/network.hpp"

namespace lr::nn {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<Tensor> first_moment;
  std::vector<Tensor> second_moment;
  std::uint64_t step = 0;

  AdamState(const ParamSet& params, AdamConfig cfg);
};

// One bias-corrected Adam update; increments state.step by one.
void adam_step(ParamSet& params, const GradStore& grads, AdamState& state);

}  // namespace lr::nn
