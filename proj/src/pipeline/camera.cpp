#include "pipeline/camera.hpp"

#include <cmath>

#include "common/error.hpp"

namespace poselift::pipeline {

CameraExtrinsics::CameraExtrinsics(const Mat3& rotation, const Vec3& translation)
    : r_(rotation), t_(translation) {
  for (const auto& row : r_)
    for (double v : row) require(std::isfinite(v), ErrorCode::kInvalidArgument, "camera rotation is non-finite");
  for (double v : t_) require(std::isfinite(v), ErrorCode::kInvalidArgument, "camera translation is non-finite");
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) {
      double dot = 0.0;
      for (int k = 0; k < 3; ++k) dot += r_[k][i] * r_[k][j];
      require(std::abs(dot - (i == j ? 1.0 : 0.0)) <= 1e-6, ErrorCode::kInvalidArgument,
              "camera rotation is not orthonormal");
    }
  const double det = r_[0][0] * (r_[1][1] * r_[2][2] - r_[1][2] * r_[2][1]) -
                     r_[0][1] * (r_[1][0] * r_[2][2] - r_[1][2] * r_[2][0]) +
                     r_[0][2] * (r_[1][0] * r_[2][1] - r_[1][1] * r_[2][0]);
  require(std::abs(det - 1.0) <= 1e-6, ErrorCode::kInvalidArgument,
          "camera rotation must have determinant +1");
}

CameraExtrinsics CameraExtrinsics::identity() {
  return CameraExtrinsics({{{1, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {0, 0, 0});
}

CameraExtrinsics CameraExtrinsics::synthetic_default() {
  return CameraExtrinsics({{{1, 0, 0}, {0, 0, -1}, {0, 1, 0}}}, {0.0, -4500.0, 1100.0});
}

Vec3 CameraExtrinsics::to_camera(const Vec3& p) const {
  const Vec3 d = {p[0] - t_[0], p[1] - t_[1], p[2] - t_[2]};
  Vec3 out{};
  for (int i = 0; i < 3; ++i) out[i] = r_[i][0] * d[0] + r_[i][1] * d[1] + r_[i][2] * d[2];
  return out;
}

nlohmann::json CameraExtrinsics::to_json() const { return {{"R", r_}, {"t", t_}}; }

CameraExtrinsics CameraExtrinsics::from_json(const nlohmann::json& j) {
  try {
    return CameraExtrinsics(j.at("R").get<Mat3>(), j.at("t").get<Vec3>());
  } catch (const nlohmann::json::exception& e) {
    fail(ErrorCode::kFormat, std::string("extrinsics: ") + e.what());
  }
}

std::array<double, 2> PinholeIntrinsics::project(const Vec3& p) const {
  return {focal * p[0] / p[2] + cx, focal * p[1] / p[2] + cy};
}

skeleton::Pose world_to_camera(const skeleton::Pose& pose3d, const CameraExtrinsics& cam) {
  require(pose3d.dim == 3 && pose3d.coords.size() % 3 == 0, ErrorCode::kShapeMismatch,
          "world_to_camera: pose must be 3D");
  skeleton::Pose out{std::vector<double>(pose3d.coords.size()), 3};
  for (std::size_t j = 0; j < pose3d.coords.size(); j += 3) {
    const Vec3 p = cam.to_camera({pose3d.coords[j], pose3d.coords[j + 1], pose3d.coords[j + 2]});
    out.coords[j] = p[0];
    out.coords[j + 1] = p[1];
    out.coords[j + 2] = p[2];
  }
  return out;
}

}  // namespace poselift::pipeline
