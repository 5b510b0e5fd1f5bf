#pragma once

#include <optional>
#include <string>
#include <vector>

#include "evaluator/evaluate.hpp"
#include "model/checkpoint.hpp"
#include "pipeline/pose_data.hpp"
#include "skeleton/skeleton.hpp"
#include "trainer/train_config.hpp"

namespace poselift::trainer {

struct TrainResult {
  std::string final_checkpoint;  // empty when out_dir is empty
  std::vector<double> step_losses;
  std::vector<double> epoch_mean_losses;
  std::vector<double> val_mpjpe;  // per completed epoch, when validation data exists
  std::uint64_t first_step = 0;
  std::uint64_t last_step = 0;  // one past the final executed step
  std::size_t n_windows = 0;
  std::optional<model::Checkpoint> checkpoint;  // final state
};

struct TrainData {
  std::vector<pipeline::PoseSequence> train;
  std::vector<pipeline::PoseSequence> val;
};

// Applies the validation policy when no validation file is given: sequences
// of cfg.val_subjects if any, else a seeded cfg.val_fraction of sequences.
TrainData split_for_validation(const std::vector<pipeline::PoseSequence>& all, const TrainConfig& cfg);

// Adam training of the lifting network. Each epoch visits all stride-1
// windows in a freshly shuffled order; per-step losses and per-epoch
// validation MPJPE go to <out_dir>/metrics.csv, checkpoints to
// <out_dir>/ckpt_step<NNNNNNNN>.plft plus latest.plft. The run is a pure
// function of (cfg, data): shuffles and dropout masks come from streams keyed
// by (seed, epoch) and (seed, step), so a resumed run continues exactly.
TrainResult train(const TrainConfig& cfg, const TrainData& data, const skeleton::SkeletonSpec& spec,
                  const std::string& out_dir);

// `train` with the named components disabled.
TrainResult ablation_run(TrainConfig cfg, const AblationToggles& toggles, const TrainData& data,
                         const skeleton::SkeletonSpec& spec, const std::string& out_dir);

inline constexpr const char* kMetricsHeader = "step,epoch,lr,train_loss,val_mpjpe_mm";

}  // namespace poselift::trainer
