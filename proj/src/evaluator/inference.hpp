#pragma once

#include <vector>

#include "kernel/matrix.hpp"
#include "model/checkpoint.hpp"
#include "model/seq2seq.hpp"
#include "pipeline/norm_stats.hpp"
#include "pipeline/pose_data.hpp"
#include "skeleton/skeleton.hpp"

namespace poselift::evaluator {

// A trained model together with the normalization it was trained under.
struct Lifter {
  model::ModelParams params;
  pipeline::NormStats stats_2d;
  pipeline::NormStats stats_3d;
  skeleton::SkeletonSpec skeleton;

  static Lifter from_checkpoint(const model::Checkpoint& ckpt);
  std::size_t window() const { return params.config.seq_len; }
};

// Lifts a root-relative 2D sequence (L x (J-1)*2 pixels, L >= T) to root-
// relative 3D (L x (J-1)*3 mm). Frames 0..T-1 come from the first window;
// frame t >= T is the last decoder output of the window ending at t.
kernel::Matrix sliding_infer(const Lifter& lifter, const kernel::Matrix& inputs_2d);

// sliding_infer over every sequence, in parallel, results in input order.
std::vector<kernel::Matrix> lift_all(const Lifter& lifter,
                                     const std::vector<pipeline::PreparedSequence>& seqs);

// Pose-file record of a lifted clip: camera-frame 3D with the root joint at
// the origin, metadata and 2D copied from `source`, no extrinsics.
pipeline::PoseSequence to_pose_sequence(const pipeline::PoseSequence& source,
                                        const kernel::Matrix& lifted_rootless,
                                        const skeleton::SkeletonSpec& spec);

}  // namespace poselift::evaluator
