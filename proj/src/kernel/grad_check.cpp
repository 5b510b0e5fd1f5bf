#include "kernel/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "common/error.hpp"

namespace poselift::kernel {

double grad_check(const std::function<double()>& f, std::span<double> params,
                  std::span<const double> analytic, const GradCheckOptions& options) {
  require(params.size() == analytic.size(), ErrorCode::kShapeMismatch,
          "grad_check: params and analytic gradient differ in length");
  std::vector<std::size_t> coords(params.size());
  std::iota(coords.begin(), coords.end(), std::size_t{0});
  if (options.max_coords != 0 && options.max_coords < coords.size()) {
    Rng rng(options.seed);
    for (std::size_t i = 0; i < options.max_coords; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.below(coords.size() - i));
      std::swap(coords[i], coords[j]);
    }
    coords.resize(options.max_coords);
  }

  double worst = 0.0;
  for (std::size_t k : coords) {
    const double saved = params[k];
    params[k] = saved + options.step;
    const double up = f();
    params[k] = saved - options.step;
    const double down = f();
    params[k] = saved;
    require(std::isfinite(up) && std::isfinite(down), ErrorCode::kNumeric,
            "grad_check: objective is non-finite near coordinate " + std::to_string(k));
    const double numeric = (up - down) / (2.0 * options.step);
    const double err = std::abs(analytic[k] - numeric) /
                       std::max(1.0, std::abs(analytic[k]) + std::abs(numeric));
    worst = std::max(worst, err);
  }
  return worst;
}

}  // namespace poselift::kernel
