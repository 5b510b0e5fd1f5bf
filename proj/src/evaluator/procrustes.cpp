#include "evaluator/procrustes.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>

#include "common/error.hpp"

namespace poselift::evaluator {

Vec3 SimilarityTransform::apply(const Vec3& p) const {
  Vec3 out{};
  for (int i = 0; i < 3; ++i)
    out[i] = scale * (rotation[i][0] * p[0] + rotation[i][1] * p[1] + rotation[i][2] * p[2]) + translation[i];
  return out;
}

std::vector<double> SimilarityTransform::apply(std::span<const double> pose) const {
  std::vector<double> out(pose.size());
  for (std::size_t j = 0; j + 2 < pose.size(); j += 3) {
    const Vec3 q = apply(Vec3{pose[j], pose[j + 1], pose[j + 2]});
    out[j] = q[0];
    out[j + 1] = q[1];
    out[j + 2] = q[2];
  }
  return out;
}

Alignment procrustes_align(std::span<const double> pred, std::span<const double> gt) {
  require(pred.size() == gt.size() && pred.size() % 3 == 0, ErrorCode::kShapeMismatch,
          "procrustes: poses must have equal multiples of 3 values");
  const auto n = static_cast<Eigen::Index>(pred.size() / 3);
  require(n >= 3, ErrorCode::kInvalidArgument, "procrustes: needs at least 3 joints");
  using Points = Eigen::Matrix<double, 3, Eigen::Dynamic>;
  const Points p = Eigen::Map<const Points>(pred.data(), 3, n);
  const Points g = Eigen::Map<const Points>(gt.data(), 3, n);
  const Eigen::Vector3d mp = p.rowwise().mean();
  const Eigen::Vector3d mg = g.rowwise().mean();
  const Points pc = p.colwise() - mp;
  const Points gc = g.colwise() - mg;
  const double var_p = pc.squaredNorm() / static_cast<double>(n);

  const Eigen::Matrix3d cov = gc * pc.transpose() / static_cast<double>(n);
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(cov, Eigen::ComputeFullU | Eigen::ComputeFullV);
  const Eigen::Vector3d sv = svd.singularValues();
  require(var_p > 0.0 && sv(0) > 0.0 && sv(1) > 1e-12 * sv(0), ErrorCode::kInvalidArgument,
          "procrustes: degenerate configuration (covariance rank < 2)");
  Eigen::Vector3d d(1.0, 1.0, 1.0);
  if ((svd.matrixU() * svd.matrixV().transpose()).determinant() < 0.0) d(2) = -1.0;
  const Eigen::Matrix3d r = svd.matrixU() * d.asDiagonal() * svd.matrixV().transpose();
  const double s = sv.dot(d) / var_p;
  const Eigen::Vector3d t = mg - s * r * mp;

  Alignment out;
  for (int i = 0; i < 3; ++i) {
    for (int j = 0; j < 3; ++j) out.transform.rotation[i][j] = r(i, j);
    out.transform.translation[i] = t(i);
  }
  out.transform.scale = s;
  out.aligned = out.transform.apply(pred);
  return out;
}

}  // namespace poselift::evaluator
