#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "pipeline/camera.hpp"
#include "pipeline/pose_data.hpp"

namespace poselift::pipeline {

struct SynthOptions {
  double fps = 50.0;
  // Per-sequence base frequency is drawn from [min, max]; both 0 gives a
  // static pose.
  double min_frequency_hz = 0.3;
  double max_frequency_hz = 1.0;
  PinholeIntrinsics intrinsics;
  // Any joint closer than this to the image plane triggers a resample.
  double min_depth_mm = 500.0;
  int max_attempts = 64;
};

// Kinematic chain of the 17-joint layout of SkeletonSpec::h36m17():
// parent of each joint (-1 for the root) and the rest offset from the parent
// in the body frame (x left, y forward, z up), millimeters.
struct KinematicChain {
  std::array<int, 17> parent;
  std::array<Vec3, 17> offset;
};
const KinematicChain& h36m17_chain();

// Paired 2D/3D clips of an articulated figure driven by smooth sinusoidal
// joint angles. 3D is world-frame (extrinsics attached); 2D is the pinhole
// projection of the camera-frame 3D. Deterministic per seed.
std::vector<PoseSequence> synth_generate(std::size_t n_sequences, std::size_t length,
                                         const CameraExtrinsics& cam, std::uint64_t seed,
                                         const SynthOptions& options = {});

}  // namespace poselift::pipeline
