#include "pipeline/windows.hpp"

#include <algorithm>

#include "common/error.hpp"

namespace poselift::pipeline {

std::vector<std::size_t> window_starts(std::size_t length, std::size_t T) {
  require(T >= 1, ErrorCode::kInvalidArgument, "window length must be >= 1");
  require(length >= T, ErrorCode::kInvalidArgument,
          "sequence of length " + std::to_string(length) + " is shorter than window " + std::to_string(T));
  std::vector<std::size_t> starts(length - T + 1);
  for (std::size_t i = 0; i < starts.size(); ++i) starts[i] = i;
  return starts;
}

namespace {
kernel::Matrix rows(const kernel::Matrix& m, std::size_t start, std::size_t count) {
  kernel::Matrix out(count, m.cols());
  std::copy(m.data() + start * m.cols(), m.data() + (start + count) * m.cols(), out.data());
  return out;
}
}  // namespace

std::vector<Window> make_windows(const PreparedSequence& seq, std::size_t T) {
  require(seq.targets_3d.empty() || seq.targets_3d.rows() == seq.inputs_2d.rows(),
          ErrorCode::kShapeMismatch, "make_windows: 2D and 3D lengths differ");
  std::vector<Window> out;
  for (std::size_t s : window_starts(seq.inputs_2d.rows(), T)) {
    Window w;
    w.inputs_2d = rows(seq.inputs_2d, s, T);
    if (!seq.targets_3d.empty()) w.targets_3d = rows(seq.targets_3d, s, T);
    w.subject = seq.subject;
    w.action = seq.action;
    w.start = s;
    out.push_back(std::move(w));
  }
  return out;
}

namespace {

struct FrameSource {
  const kernel::Matrix* in2d;
  const kernel::Matrix* out3d;
  std::size_t start;
};

SequenceBatch assemble(std::span<const FrameSource> src, std::vector<BatchMeta> meta, std::size_t T,
                       const NormStats& s2, const NormStats& s3) {
  require(!src.empty(), ErrorCode::kInvalidArgument, "assemble_batch: no windows");
  const std::size_t d2 = src[0].in2d->cols();
  const bool with_3d = src[0].out3d != nullptr && !src[0].out3d->empty();
  const std::size_t d3 = with_3d ? src[0].out3d->cols() : 0;
  require(d2 == s2.dim(), ErrorCode::kShapeMismatch, "assemble_batch: 2D stats dimension mismatch");
  require(!with_3d || d3 == s3.dim(), ErrorCode::kShapeMismatch,
          "assemble_batch: 3D stats dimension mismatch");
  SequenceBatch b;
  b.inputs_2d = kernel::Tensor3(src.size(), T, d2);
  b.targets_3d = kernel::Tensor3(src.size(), T, d3);
  b.meta = std::move(meta);
  for (std::size_t i = 0; i < src.size(); ++i) {
    const auto& s = src[i];
    require(s.in2d->cols() == d2 && s.start + T <= s.in2d->rows(), ErrorCode::kShapeMismatch,
            "assemble_batch: inconsistent window " + std::to_string(i));
    const bool has = s.out3d != nullptr && !s.out3d->empty();
    require(has == with_3d && (!has || s.out3d->cols() == d3), ErrorCode::kShapeMismatch,
            "assemble_batch: inconsistent targets in window " + std::to_string(i));
    for (std::size_t t = 0; t < T; ++t) {
      // Encoder input step t reads frame T-1-t.
      auto dst = b.inputs_2d.frame(i, t);
      auto row = s.in2d->row(s.start + T - 1 - t);
      std::copy(row.begin(), row.end(), dst.begin());
      normalize_in_place(dst, s2);
      if (with_3d) {
        auto tdst = b.targets_3d.frame(i, t);
        auto trow = s.out3d->row(s.start + t);
        std::copy(trow.begin(), trow.end(), tdst.begin());
        normalize_in_place(tdst, s3);
      }
    }
  }
  return b;
}

}  // namespace

SequenceBatch assemble_batch(std::span<const Window> windows, const NormStats& stats_2d,
                             const NormStats& stats_3d) {
  require(!windows.empty(), ErrorCode::kInvalidArgument, "assemble_batch: no windows");
  const std::size_t T = windows[0].inputs_2d.rows();
  std::vector<FrameSource> src;
  std::vector<BatchMeta> meta;
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    require(w.inputs_2d.rows() == T && (w.targets_3d.empty() || w.targets_3d.rows() == T),
            ErrorCode::kShapeMismatch,
            "assemble_batch: window " + std::to_string(i) + " has length " +
                std::to_string(w.inputs_2d.rows()) + ", expected " + std::to_string(T));
    src.push_back({&w.inputs_2d, &w.targets_3d, 0});
    meta.push_back({w.subject, w.action});
  }
  return assemble(src, std::move(meta), T, stats_2d, stats_3d);
}

SequenceBatch assemble_batch(const std::vector<PreparedSequence>& seqs,
                             std::span<const WindowRef> refs, std::size_t T,
                             const NormStats& stats_2d, const NormStats& stats_3d) {
  std::vector<FrameSource> src;
  std::vector<BatchMeta> meta;
  src.reserve(refs.size());
  for (const auto& r : refs) {
    require(r.sequence < seqs.size(), ErrorCode::kInvalidArgument, "assemble_batch: bad sequence index");
    const auto& s = seqs[r.sequence];
    src.push_back({&s.inputs_2d, &s.targets_3d, r.start});
    meta.push_back({s.subject, s.action});
  }
  return assemble(src, std::move(meta), T, stats_2d, stats_3d);
}

kernel::Tensor3 reverse_time(const kernel::Tensor3& x) {
  kernel::Tensor3 out(x.n, x.t, x.d);
  for (std::size_t i = 0; i < x.n; ++i)
    for (std::size_t t = 0; t < x.t; ++t) {
      auto src = x.frame(i, x.t - 1 - t);
      std::copy(src.begin(), src.end(), out.frame(i, t).begin());
    }
  return out;
}

}  // namespace poselift::pipeline
