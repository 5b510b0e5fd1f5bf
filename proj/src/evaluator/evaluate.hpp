#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "evaluator/inference.hpp"
#include "kernel/matrix.hpp"
#include "pipeline/pose_data.hpp"

namespace poselift::evaluator {

struct ActionError {
  std::size_t frames = 0;
  double error_mm = 0.0;  // frame-weighted mean within the action
};

struct EvalReport {
  int protocol = 1;
  std::map<std::string, ActionError> per_action;
  double overall_frames = 0.0;   // mean over all frames
  double overall_actions = 0.0;  // unweighted mean of the per-action means
  std::size_t n_frames = 0;
  std::string fingerprint;
  std::vector<double> frame_errors;  // dataset order, concatenated sequences

  nlohmann::json to_json(bool with_frames = false) const;
  // action,protocol,frames,error_mm plus ALL_FRAMES and AVG_ACTIONS rows.
  std::string to_csv() const;
};

// Protocol 1: MPJPE of root-relative poses. Protocol 2: MPJPE after a
// per-frame similarity alignment to ground truth.
double frame_error(std::span<const double> pred, std::span<const double> gt, int protocol);

// `predictions[i]` is L_i x (J-1)*3 root-relative mm for `gt[i]`.
EvalReport evaluate_predictions(const std::vector<kernel::Matrix>& predictions,
                                const std::vector<pipeline::PreparedSequence>& gt, int protocol,
                                const std::string& fingerprint = "");

// Lifts every sequence with sliding-window inference and scores it.
EvalReport evaluate(const Lifter& lifter, const std::vector<pipeline::PoseSequence>& data, int protocol);

struct NoiseSweepRow {
  double sigma = 0.0;
  EvalReport report;
};

// Protocol-2 evaluation with N(0, sigma^2) pixel noise added to the 2D
// detections before normalization, one report per sigma.
std::vector<NoiseSweepRow> noise_sweep(const Lifter& lifter, const std::vector<pipeline::PoseSequence>& data,
                                       const std::vector<double>& sigmas, std::uint64_t seed);

std::string fingerprint_of(const Lifter& lifter);

void write_text_file(const std::string& path, const std::string& content);

}  // namespace poselift::evaluator
