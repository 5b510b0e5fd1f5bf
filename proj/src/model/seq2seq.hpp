#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common/rng.hpp"
#include "kernel/matrix.hpp"
#include "model/lstm_cell.hpp"

namespace poselift::model {

using kernel::Tensor3;

struct ModelConfig {
  std::size_t input_dim = 0;   // (J-1)*2
  std::size_t output_dim = 0;  // (J-1)*3
  std::size_t hidden = 1024;
  std::size_t seq_len = 5;
  double dropout_p = 0.5;
  double forget_bias = 1.0;
  bool residual = true;
  bool layer_norm = true;
  // Dense map in front of the decoder cell; identity when false.
  bool dense_decoder_input = false;

  void validate() const;
  nlohmann::json to_json() const;
  static ModelConfig from_json(const nlohmann::json& j);
  friend bool operator==(const ModelConfig&, const ModelConfig&) = default;
};

// Encoder/decoder parameters. Weight matrices use the fan_in x fan_out
// layout (y = x W + b).
struct ModelParams {
  ModelConfig config;
  LstmCellParams encoder;
  LstmCellParams decoder;
  Matrix dec_in_w;  // D x D, only with dense_decoder_input
  std::vector<double> dec_in_b;
  Matrix out_w;  // H x D
  std::vector<double> out_b;

  static ModelParams init(const ModelConfig& config, Rng& rng);
  // Same shapes, all zeros (used as the gradient accumulator).
  ModelParams zeros_like() const;

  // Tensors in checkpoint storage order.
  void visit(const std::function<void(const std::string&, std::span<double>)>& fn);
  void visit(const std::function<void(const std::string&, std::span<const double>)>& fn) const;
  std::vector<std::size_t> tensor_sizes() const;
  std::size_t parameter_count() const;
  // Flat copy / assignment in storage order (gradient checks, tests).
  std::vector<double> flatten() const;
  void assign_flat(std::span<const double> values);

  friend bool operator==(const ModelParams&, const ModelParams&) = default;
};

enum class Mode { kTrain, kInfer };

struct ForwardTape {
  std::size_t batch = 0;
  std::size_t steps = 0;
  std::vector<CellCache> encoder;
  std::vector<CellCache> decoder;
  std::vector<Matrix> dec_inputs;  // input fed to decoder step k (START or y_{k-1})
  std::vector<Matrix> dec_h;       // decoder hidden state after step k
};

struct ForwardResult {
  Tensor3 predictions;  // N x T x D, normalized 3D space
  ForwardTape tape;
};

// `inputs_2d` is N x T x input_dim, already time-reversed. Train mode draws
// input dropout masks from `rng` (required when dropout_p > 0); infer mode
// never drops.
ForwardResult forward(const ModelParams& params, const Tensor3& inputs_2d, Mode mode, Rng* rng);

// Exact BPTT of `forward` for the cotangent `d_predictions`.
ModelParams backward(const ModelParams& params, const ForwardTape& tape,
                     const Tensor3& d_predictions);

}  // namespace poselift::model
