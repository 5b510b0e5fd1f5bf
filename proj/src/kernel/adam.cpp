#include "kernel/adam.hpp"

#include <cmath>

#include "common/error.hpp"

namespace poselift::kernel {

AdamState AdamState::for_sizes(std::span<const std::size_t> sizes) {
  AdamState s;
  for (std::size_t n : sizes) {
    s.m.emplace_back(n, 0.0);
    s.v.emplace_back(n, 0.0);
  }
  return s;
}

void adam_step(std::span<const ParamRef> params, std::span<const GradRef> grads, AdamState& state,
               double lr) {
  require(params.size() == grads.size() && state.m.size() == params.size() &&
              state.v.size() == params.size(),
          ErrorCode::kShapeMismatch, "adam_step: parameter/gradient/state count mismatch");
  for (std::size_t i = 0; i < params.size(); ++i) {
    const std::string name(params[i].name);
    require(grads[i].values.size() == params[i].values.size() &&
                state.m[i].size() == params[i].values.size() &&
                state.v[i].size() == params[i].values.size(),
            ErrorCode::kShapeMismatch, "adam_step: shape mismatch for parameter '" + name + "'");
    for (double g : grads[i].values)
      require(std::isfinite(g), ErrorCode::kNumeric,
              "adam_step: non-finite gradient in parameter '" + name + "'");
  }

  state.step_count += 1;
  const double t = static_cast<double>(state.step_count);
  const double c1 = 1.0 - std::pow(state.beta1, t);
  const double c2 = 1.0 - std::pow(state.beta2, t);
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].values;
    auto g = grads[i].values;
    auto& m = state.m[i];
    auto& v = state.v[i];
    for (std::size_t k = 0; k < p.size(); ++k) {
      m[k] = state.beta1 * m[k] + (1.0 - state.beta1) * g[k];
      v[k] = state.beta2 * v[k] + (1.0 - state.beta2) * g[k] * g[k];
      const double mhat = m[k] / c1;
      const double vhat = v[k] / c2;
      p[k] -= lr * mhat / (std::sqrt(vhat) + state.eps);
    }
  }
}

}  // namespace poselift::kernel
