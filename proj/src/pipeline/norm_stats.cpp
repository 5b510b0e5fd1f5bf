#include "pipeline/norm_stats.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace poselift::pipeline {

NormStats fit_norm(const kernel::Matrix& data) {
  require(data.rows() > 0 && data.cols() > 0, ErrorCode::kInvalidArgument,
          "fit_norm: empty data set");
  const std::size_t n = data.rows(), d = data.cols();
  NormStats s;
  s.mean.assign(d, 0.0);
  s.std.assign(d, 0.0);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) s.mean[k] += data(i, k);
  for (double& m : s.mean) m /= static_cast<double>(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t k = 0; k < d; ++k) {
      const double c = data(i, k) - s.mean[k];
      s.std[k] += c * c;
    }
  for (double& v : s.std) v = std::max(std::sqrt(v / static_cast<double>(n)), kStdFloor);
  return s;
}

namespace {
void check_dim(std::size_t n, const NormStats& stats) {
  require(n == stats.dim() && stats.std.size() == stats.dim(), ErrorCode::kShapeMismatch,
          "normalization: vector length " + std::to_string(n) + " != stats dimension " +
              std::to_string(stats.dim()));
}
}  // namespace

void normalize_in_place(std::span<double> v, const NormStats& stats) {
  check_dim(v.size(), stats);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = (v[k] - stats.mean[k]) / stats.std[k];
}

void denormalize_in_place(std::span<double> v, const NormStats& stats) {
  check_dim(v.size(), stats);
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = v[k] * stats.std[k] + stats.mean[k];
}

std::vector<double> normalize(std::span<const double> v, const NormStats& stats) {
  std::vector<double> out(v.begin(), v.end());
  normalize_in_place(out, stats);
  return out;
}

std::vector<double> denormalize(std::span<const double> v, const NormStats& stats) {
  std::vector<double> out(v.begin(), v.end());
  denormalize_in_place(out, stats);
  return out;
}

nlohmann::json NormStats::to_json() const { return {{"mean", mean}, {"std", std}}; }

NormStats NormStats::from_json(const nlohmann::json& j) {
  NormStats s;
  s.mean = j.at("mean").get<std::vector<double>>();
  s.std = j.at("std").get<std::vector<double>>();
  require(s.mean.size() == s.std.size(), ErrorCode::kFormat, "norm stats: mean/std length differ");
  for (double v : s.std)
    require(v >= kStdFloor, ErrorCode::kFormat, "norm stats: std below floor");
  return s;
}

}  // namespace poselift::pipeline
