#pragma once

#include <span>
#include <vector>

#include "pipeline/camera.hpp"

namespace poselift::evaluator {

using pipeline::Mat3;
using pipeline::Vec3;

// x -> scale * rotation * x + translation; rotation is proper (det +1).
struct SimilarityTransform {
  double scale = 1.0;
  Mat3 rotation = {{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}};
  Vec3 translation = {0, 0, 0};

  Vec3 apply(const Vec3& p) const;
  std::vector<double> apply(std::span<const double> pose) const;
};

struct Alignment {
  std::vector<double> aligned;
  SimilarityTransform transform;
};

// Least-squares similarity fit of `pred` onto `gt` (flat joint-major xyz):
// centroids, SVD of the cross-covariance, reflection-corrected rotation and
// trace-ratio scale. Throws on degenerate (rank < 2) configurations.
Alignment procrustes_align(std::span<const double> pred, std::span<const double> gt);

}  // namespace poselift::evaluator
