#pragma once

#include <span>
#include <vector>

#include "kernel/matrix.hpp"

namespace poselift::kernel {

inline constexpr double kLayerNormEps = 1e-6;

// y = gain * (x - mean) / sqrt(var + eps) + bias, population variance over x.
std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gain,
                               std::span<const double> bias);

struct LayerNormGrads {
  std::vector<double> dx;
  std::vector<double> dgain;
  std::vector<double> dbias;
};

LayerNormGrads layer_norm_backward(std::span<const double> x, std::span<const double> gain,
                                   std::span<const double> dy);

// Row-wise layer norm applied independently to consecutive column segments of
// width `segment` (one segment per LSTM gate). Gain and bias span all columns.
struct SegmentedLayerNorm {
  std::size_t segment = 0;
  Matrix xhat;               // normalized input, pre-gain
  std::vector<double> rstd;  // rows x segments

  Matrix forward(const Matrix& x, std::size_t segment_width, std::span<const double> gain,
                 std::span<const double> bias);
  // Returns dx; accumulates into dgain/dbias.
  Matrix backward(const Matrix& dy, std::span<const double> gain, std::span<double> dgain,
                  std::span<double> dbias) const;
};

}  // namespace poselift::kernel
