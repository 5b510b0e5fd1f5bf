#pragma once

#include <array>

#include <nlohmann/json.hpp>

#include "skeleton/skeleton.hpp"

namespace poselift::pipeline {

using Vec3 = std::array<double, 3>;
using Mat3 = std::array<std::array<double, 3>, 3>;

// World -> camera rigid transform, p_cam = R (p_world - t). R rows are the
// camera axes expressed in world coordinates.
class CameraExtrinsics {
 public:
  // Rejects rotations that are not orthonormal with det +1 (1e-6).
  CameraExtrinsics(const Mat3& rotation, const Vec3& translation);

  static CameraExtrinsics identity();
  // Fixed camera used by the synthetic generator: 4.5 m in front of the
  // origin at 1.1 m height, looking along +y with z up in the world.
  static CameraExtrinsics synthetic_default();

  const Mat3& rotation() const { return r_; }
  const Vec3& translation() const { return t_; }

  Vec3 to_camera(const Vec3& p) const;

  nlohmann::json to_json() const;
  static CameraExtrinsics from_json(const nlohmann::json& j);

  friend bool operator==(const CameraExtrinsics&, const CameraExtrinsics&) = default;

 private:
  Mat3 r_;
  Vec3 t_;
};

struct PinholeIntrinsics {
  double focal = 1000.0;
  double cx = 500.0;
  double cy = 500.0;

  // (f X / Z + cx, f Y / Z + cy)
  std::array<double, 2> project(const Vec3& p_cam) const;
};

skeleton::Pose world_to_camera(const skeleton::Pose& pose3d, const CameraExtrinsics& cam);

}  // namespace poselift::pipeline
