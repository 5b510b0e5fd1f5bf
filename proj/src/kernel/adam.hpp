#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace poselift::kernel {

struct ParamRef {
  std::string_view name;
  std::span<double> values;
};

struct GradRef {
  std::string_view name;
  std::span<const double> values;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::uint64_t step_count = 0;
  std::vector<std::vector<double>> m;
  std::vector<std::vector<double>> v;

  // Zeroed moments for parameters of the given sizes.
  static AdamState for_sizes(std::span<const std::size_t> sizes);
  friend bool operator==(const AdamState&, const AdamState&) = default;
};

// One bias-corrected Adam update:
//   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
//   p <- p - lr * mhat / (sqrt(vhat) + eps)
// Gradients are validated before any parameter is touched.
void adam_step(std::span<const ParamRef> params, std::span<const GradRef> grads, AdamState& state,
               double lr);

}  // namespace poselift::kernel
