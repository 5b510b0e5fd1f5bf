#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernel/matrix.hpp"

namespace poselift::pipeline {

inline constexpr double kStdFloor = 1e-8;

// Per-dimension population mean and standard deviation.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std;

  std::size_t dim() const { return mean.size(); }

  nlohmann::json to_json() const;
  static NormStats from_json(const nlohmann::json& j);

  friend bool operator==(const NormStats&, const NormStats&) = default;
};

// Rows of `data` are samples.
NormStats fit_norm(const kernel::Matrix& data);

std::vector<double> normalize(std::span<const double> v, const NormStats& stats);
std::vector<double> denormalize(std::span<const double> v, const NormStats& stats);
void normalize_in_place(std::span<double> v, const NormStats& stats);
void denormalize_in_place(std::span<double> v, const NormStats& stats);

}  // namespace poselift::pipeline
