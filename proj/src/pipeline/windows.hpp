#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "kernel/matrix.hpp"
#include "pipeline/norm_stats.hpp"
#include "pipeline/pose_data.hpp"

namespace poselift::pipeline {

// Frame-aligned slice [start, start+T) of a prepared sequence (un-normalized).
struct Window {
  kernel::Matrix inputs_2d;   // T x (J-1)*2
  kernel::Matrix targets_3d;  // T x (J-1)*3, or empty
  std::string subject;
  std::string action;
  std::size_t start = 0;
};

// Start frames of all stride-1 windows of length T over L frames: 0..L-T.
std::vector<std::size_t> window_starts(std::size_t length, std::size_t T);
std::vector<Window> make_windows(const PreparedSequence& seq, std::size_t T);

struct BatchMeta {
  std::string subject;
  std::string action;
};

// Network-ready batch. inputs_2d is normalized and time-reversed (the encoder
// reads the last frame first); targets_3d is normalized and chronological.
struct SequenceBatch {
  kernel::Tensor3 inputs_2d;
  kernel::Tensor3 targets_3d;  // d == 0 when no ground truth is attached
  std::vector<BatchMeta> meta;

  std::size_t size() const { return inputs_2d.n; }
  std::size_t steps() const { return inputs_2d.t; }
};

SequenceBatch assemble_batch(std::span<const Window> windows, const NormStats& stats_2d,
                             const NormStats& stats_3d);

// Reference to a window inside a prepared sequence; avoids copying frames
// when batching large training sets.
struct WindowRef {
  std::size_t sequence = 0;
  std::size_t start = 0;
};

SequenceBatch assemble_batch(const std::vector<PreparedSequence>& seqs,
                             std::span<const WindowRef> refs, std::size_t T,
                             const NormStats& stats_2d, const NormStats& stats_3d);

// Reverses a tensor along its time axis.
kernel::Tensor3 reverse_time(const kernel::Tensor3& x);

}  // namespace poselift::pipeline
