#include "evaluator/metrics.hpp"

#include <cmath>

#include "common/error.hpp"

namespace poselift::evaluator {

double mpjpe(std::span<const double> pred, std::span<const double> gt) {
  require(pred.size() == gt.size() && !pred.empty() && pred.size() % 3 == 0, ErrorCode::kShapeMismatch,
          "mpjpe: poses must have equal, non-zero multiples of 3 values");
  double s = 0.0;
  for (std::size_t j = 0; j < pred.size(); j += 3) {
    const double dx = pred[j] - gt[j], dy = pred[j + 1] - gt[j + 1], dz = pred[j + 2] - gt[j + 2];
    s += std::sqrt(dx * dx + dy * dy + dz * dz);
  }
  return s / static_cast<double>(pred.size() / 3);
}

double temporal_jitter(const kernel::Matrix& frames) {
  if (frames.rows() < 2) return 0.0;
  double s = 0.0;
  for (std::size_t t = 1; t < frames.rows(); ++t) s += mpjpe(frames.row(t), frames.row(t - 1));
  return s / static_cast<double>(frames.rows() - 1);
}

}  // namespace poselift::evaluator
