#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>

#include "common/rng.hpp"

namespace poselift::kernel {

struct GradCheckOptions {
  double step = 1e-5;
  // Check at most this many coordinates (sampled without replacement); 0 = all.
  std::size_t max_coords = 0;
  std::uint64_t seed = 0;
};

// Central-difference check of `analytic` against f at `params`.
// Returns max |a - n| / max(1, |a| + |n|) over the checked coordinates.
// `params` is perturbed in place and restored before returning.
double grad_check(const std::function<double()>& f, std::span<double> params,
                  std::span<const double> analytic, const GradCheckOptions& options = {});

}  // namespace poselift::kernel
