#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "common/rng.hpp"
#include "kernel/matrix.hpp"
#include "pipeline/pose_data.hpp"

namespace poselift::pipeline {

// Adds i.i.d. N(0, sigma^2) to every value. Works on un-normalized pixel
// coordinates; sigma == 0 leaves the values untouched.
void add_gaussian_noise(std::span<double> values, double sigma, Rng& rng);

kernel::Tensor3 add_gaussian_noise(const kernel::Tensor3& batch_2d, double sigma, std::uint64_t seed);

// Noisy copy of the 2D detections of every sequence; sequence i draws from
// the stream split(i) so the result does not depend on processing order.
std::vector<PoseSequence> add_gaussian_noise(const std::vector<PoseSequence>& seqs, double sigma,
                                             std::uint64_t seed);

}  // namespace poselift::pipeline
