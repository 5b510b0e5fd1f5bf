#pragma once

#include <cstddef>

#include "common/rng.hpp"
#include "kernel/matrix.hpp"

namespace poselift::kernel {

// Glorot/Xavier uniform: i.i.d. U[-a, a], a = sqrt(6 / (fan_in + fan_out)).
// The result is fan_in x fan_out (the layout used by y = x * W).
Matrix xavier_uniform(std::size_t fan_in, std::size_t fan_out, Rng& rng);

double xavier_bound(std::size_t fan_in, std::size_t fan_out);

}  // namespace poselift::kernel
