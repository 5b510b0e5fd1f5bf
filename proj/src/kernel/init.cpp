#include "kernel/init.hpp"

#include <cmath>

#include "common/error.hpp"

namespace poselift::kernel {

double xavier_bound(std::size_t fan_in, std::size_t fan_out) {
  require(fan_in > 0 && fan_out > 0, ErrorCode::kInvalidArgument,
          "xavier_uniform: fans must be positive");
  return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  const double a = xavier_bound(fan_in, fan_out);
  Matrix w(fan_in, fan_out);
  for (double& v : w.values()) v = a * (2.0 * rng.uniform() - 1.0);
  return w;
}

}  // namespace poselift::kernel
