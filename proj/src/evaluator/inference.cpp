#include "evaluator/inference.hpp"

#include <algorithm>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "pipeline/windows.hpp"

namespace poselift::evaluator {

namespace {
constexpr std::size_t kMaxWindowsPerPass = 512;
}

Lifter Lifter::from_checkpoint(const model::Checkpoint& ckpt) {
  return Lifter{ckpt.params, ckpt.stats_2d, ckpt.stats_3d, ckpt.skeleton};
}

kernel::Matrix sliding_infer(const Lifter& lifter, const kernel::Matrix& inputs_2d) {
  const std::size_t T = lifter.window();
  const std::size_t L = inputs_2d.rows();
  require(inputs_2d.cols() == lifter.params.config.input_dim, ErrorCode::kShapeMismatch,
          "sliding_infer: 2D frame width " + std::to_string(inputs_2d.cols()) + " != model input " +
              std::to_string(lifter.params.config.input_dim));
  require(L >= T, ErrorCode::kInvalidArgument,
          "sliding_infer: sequence length " + std::to_string(L) + " < window " + std::to_string(T));

  const std::vector<pipeline::PreparedSequence> one{{"", "", inputs_2d, {}}};
  const std::size_t n_windows = L - T + 1;
  const std::size_t d = lifter.params.config.output_dim;
  kernel::Matrix out(L, d);
  for (std::size_t lo = 0; lo < n_windows; lo += kMaxWindowsPerPass) {
    const std::size_t hi = std::min(n_windows, lo + kMaxWindowsPerPass);
    std::vector<pipeline::WindowRef> refs;
    for (std::size_t w = lo; w < hi; ++w) refs.push_back({0, w});
    auto batch = pipeline::assemble_batch(one, refs, T, lifter.stats_2d, lifter.stats_3d);
    auto res = model::forward(lifter.params, batch.inputs_2d, model::Mode::kInfer, nullptr);
    for (std::size_t w = lo; w < hi; ++w) {
      const std::size_t i = w - lo;
      if (w == 0) {
        for (std::size_t t = 0; t < T; ++t) {
          auto dst = out.row(t);
          auto src = res.predictions.frame(i, t);
          std::copy(src.begin(), src.end(), dst.begin());
        }
      } else {
        auto src = res.predictions.frame(i, T - 1);
        std::copy(src.begin(), src.end(), out.row(w + T - 1).begin());
      }
    }
  }
  for (std::size_t f = 0; f < L; ++f) pipeline::denormalize_in_place(out.row(f), lifter.stats_3d);
  return out;
}

std::vector<kernel::Matrix> lift_all(const Lifter& lifter,
                                     const std::vector<pipeline::PreparedSequence>& seqs) {
  std::vector<kernel::Matrix> out(seqs.size());
  parallel_for(seqs.size(), [&](std::size_t i) { out[i] = sliding_infer(lifter, seqs[i].inputs_2d); });
  return out;
}

pipeline::PoseSequence to_pose_sequence(const pipeline::PoseSequence& source,
                                        const kernel::Matrix& lifted,
                                        const skeleton::SkeletonSpec& spec) {
  pipeline::PoseSequence out;
  out.subject = source.subject;
  out.action = source.action;
  out.camera = source.camera;
  out.frames_2d = source.frames_2d;
  out.frames_3d = kernel::Matrix(lifted.rows(), spec.n_joints() * 3);
  for (std::size_t f = 0; f < lifted.rows(); ++f) {
    auto r = lifted.row(f);
    auto full = skeleton::insert_root({{r.begin(), r.end()}, 3}, spec);
    std::copy(full.coords.begin(), full.coords.end(), out.frames_3d.row(f).begin());
  }
  return out;
}

}  // namespace poselift::evaluator
