#include "pipeline/noise.hpp"

#include <string>

#include "common/error.hpp"

namespace poselift::pipeline {

void add_gaussian_noise(std::span<double> values, double sigma, Rng& rng) {
  require(sigma >= 0.0, ErrorCode::kInvalidArgument,
          "noise sigma must be >= 0, got " + std::to_string(sigma));
  if (sigma == 0.0) return;
  for (double& v : values) v += sigma * rng.normal();
}

kernel::Tensor3 add_gaussian_noise(const kernel::Tensor3& batch_2d, double sigma, std::uint64_t seed) {
  kernel::Tensor3 out = batch_2d;
  Rng rng = Rng(seed).split("noise");
  add_gaussian_noise(out.data, sigma, rng);
  return out;
}

std::vector<PoseSequence> add_gaussian_noise(const std::vector<PoseSequence>& seqs, double sigma,
                                             std::uint64_t seed) {
  std::vector<PoseSequence> out = seqs;
  const Rng base = Rng(seed).split("noise");
  for (std::size_t i = 0; i < out.size(); ++i) {
    Rng rng = base.split(static_cast<std::uint64_t>(i));
    add_gaussian_noise(out[i].frames_2d.values(), sigma, rng);
  }
  return out;
}

}  // namespace poselift::pipeline
