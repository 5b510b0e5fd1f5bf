#pragma once

#include <optional>
#include <string>
#include <vector>

#include "kernel/matrix.hpp"
#include "pipeline/camera.hpp"
#include "skeleton/skeleton.hpp"

namespace poselift::pipeline {

// One recorded or synthesized clip: 2D detections (pixels) and optional 3D
// ground truth (mm). 3D is world-frame when `extrinsics` is present and
// camera-frame otherwise.
struct PoseSequence {
  std::string subject;
  std::string action;
  std::string camera;
  kernel::Matrix frames_2d;  // L x (J*2)
  kernel::Matrix frames_3d;  // L x (J*3), or empty
  std::optional<CameraExtrinsics> extrinsics;

  std::size_t length() const { return frames_2d.rows(); }
  bool has_3d() const { return !frames_3d.empty(); }

  friend bool operator==(const PoseSequence&, const PoseSequence&) = default;
};

// Line-delimited JSON pose file, one sequence per line:
// {"subject","action","camera","frames_2d":[[...]],"frames_3d":[[...]]?,
//  "extrinsics":{"R":[[...]],"t":[...]}?}
// Frames are validated against `spec`. Blank lines are ignored.
std::vector<PoseSequence> ingest(const std::string& path, const skeleton::SkeletonSpec& spec);
std::vector<PoseSequence> parse_pose_lines(std::istream& in, const skeleton::SkeletonSpec& spec,
                                           const std::string& source_name = "<stream>");
void write_pose_file(const std::string& path, const std::vector<PoseSequence>& sequences);
std::string pose_line(const PoseSequence& seq);

// Camera-frame 3D of a sequence (applies the inverse rigid transform when
// the clip carries extrinsics).
kernel::Matrix camera_frame_3d(const PoseSequence& seq);

// Network-space view of a sequence: root-centered, root-removed rows.
struct PreparedSequence {
  std::string subject;
  std::string action;
  kernel::Matrix inputs_2d;   // L x (J-1)*2, pixels relative to root
  kernel::Matrix targets_3d;  // L x (J-1)*3, mm camera frame relative to root; may be empty
};

PreparedSequence prepare(const PoseSequence& seq, const skeleton::SkeletonSpec& spec);
std::vector<PreparedSequence> prepare_all(const std::vector<PoseSequence>& seqs,
                                          const skeleton::SkeletonSpec& spec);

}  // namespace poselift::pipeline
