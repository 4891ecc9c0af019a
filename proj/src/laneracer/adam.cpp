#include "laneracer/adam.hpp"

#include <cmath>

#include "laneracer/error.hpp"

namespace lr::nn {

AdamState::AdamState(const ParamSet& params, AdamConfig cfg) : config(cfg) {
  for (const auto& p : params) {
    first_moment.emplace_back(p.shape());
    second_moment.emplace_back(p.shape());
  }
}

void adam_step(ParamSet& params, const GradStore& grads, AdamState& state) {
  if (params.size() != grads.size() || params.size() != state.first_moment.size()) {
    fail(ErrorCode::shape_mismatch, "adam_step: parameter, gradient and moment counts differ");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].shape() != grads[i].shape() || params[i].shape() != state.first_moment[i].shape()) {
      fail(ErrorCode::shape_mismatch, "adam_step: shape mismatch on parameter " + std::to_string(i) + ": " +
                                          shape_str(params[i].shape()) + " vs gradient " + shape_str(grads[i].shape()));
    }
  }
  const auto& c = state.config;
  state.step += 1;
  const double t = static_cast<double>(state.step);
  const double correction1 = 1.0 - std::pow(c.beta1, t);
  const double correction2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    double* p = params[i].ptr();
    const double* g = grads[i].ptr();
    double* m = state.first_moment[i].ptr();
    double* v = state.second_moment[i].ptr();
    for (std::size_t k = 0; k < params[i].size(); ++k) {
      m[k] = c.beta1 * m[k] + (1.0 - c.beta1) * g[k];
      v[k] = c.beta2 * v[k] + (1.0 - c.beta2) * g[k] * g[k];
      const double m_hat = m[k] / correction1;
      const double v_hat = v[k] / correction2;
      p[k] -= c.learning_rate * m_hat / (std::sqrt(v_hat) + c.epsilon);
    }
  }
}

}  // namespace lr::nn
