#pragma once

#include <span>

#include "kernel/matrix.hpp"

namespace poselift::evaluator {

// Mean Euclidean distance over joints of two flat 3D poses (joint-major xyz).
double mpjpe(std::span<const double> pred, std::span<const double> gt);

// Mean over t >= 1 of the mean per-joint displacement |y_t - y_{t-1}| of a
// 3D sequence (rows are frames). 0 for sequences shorter than 2 frames.
double temporal_jitter(const kernel::Matrix& frames);

}  // namespace poselift::evaluator
