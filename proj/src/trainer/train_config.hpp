#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "loss/loss.hpp"
#include "model/seq2seq.hpp"

namespace poselift::trainer {

// Components that can be switched off for ablation studies. Disabling
// recurrent_dropout forces p = 0; disabling smoothness forces beta = 0.
struct AblationToggles {
  bool residual = true;
  bool layer_norm = true;
  bool recurrent_dropout = true;
  bool smoothness = true;

  friend bool operator==(const AblationToggles&, const AblationToggles&) = default;
};

struct TrainConfig {
  std::size_t epochs = 100;
  std::size_t batch_size = 32;
  std::size_t seq_len = 5;
  std::size_t hidden = 1024;
  double lr0 = 1e-5;
  double lr_decay_gamma = 0.99999;  // per iteration
  double dropout_p = 0.5;
  double grad_clip = 5.0;  // global-norm clip; 0 disables
  double forget_bias = 1.0;
  bool dense_decoder_input = false;
  loss::LossWeights loss;
  AblationToggles ablation;
  std::uint64_t seed = 0;
  // Validation split used when no separate validation data is given:
  // held-out subjects if listed, else this fraction of sequences.
  std::vector<std::string> val_subjects;
  double val_fraction = 0.1;
  // Run control (not part of the stored training identity).
  std::size_t checkpoint_every_epochs = 10;
  std::size_t max_steps = 0;  // 0 = run all epochs
  std::string resume_from;

  // Throws ErrorCode::kConfig listing every violated constraint.
  void validate() const;
  // Identity of the run: everything except run-control fields.
  nlohmann::json identity_json() const;
  nlohmann::json to_json() const;

  // Model configuration after ablation toggles are applied.
  model::ModelConfig model_config(std::size_t input_dim, std::size_t output_dim) const;
  loss::LossWeights effective_loss() const;
};

// Fully resolved command configuration.
struct RunConfig {
  TrainConfig train;
  std::string skeleton;  // path; empty = built-in 17-joint layout
  std::string data;
  std::string val_data;
  std::string out;

  nlohmann::json to_json() const;
};

// Resolves `overrides` > `file` > built-in defaults. Unknown keys, type
// errors, range violations and missing referenced paths are all collected
// and reported together in one ErrorCode::kConfig error.
RunConfig resolve_run_config(const nlohmann::json& file, const nlohmann::json& overrides,
                             bool check_paths = true);

// lr0 * gamma^iteration
double lr_at(std::uint64_t iteration, const TrainConfig& cfg);

}  // namespace poselift::trainer
