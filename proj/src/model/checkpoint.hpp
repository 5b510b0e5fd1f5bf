#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include <nlohmann/json.hpp>

#include "kernel/adam.hpp"
#include "model/seq2seq.hpp"
#include "pipeline/norm_stats.hpp"
#include "skeleton/skeleton.hpp"

namespace poselift::model {

inline constexpr std::uint32_t kCheckpointVersion = 1;

// Everything needed to resume training or to lift new data.
struct Checkpoint {
  ModelParams params;
  kernel::AdamState optimizer;
  pipeline::NormStats stats_2d;
  pipeline::NormStats stats_3d;
  skeleton::SkeletonSpec skeleton;
  nlohmann::json train_state = nlohmann::json::object();  // config + progress

  friend bool operator==(const Checkpoint&, const Checkpoint&) = default;
};

// Binary layout, all integers and floats little-endian:
//   "PLFT" | u32 version
//   u32 input_dim | u32 output_dim | u32 hidden | u32 seq_len
//   u32 flags (1 residual, 2 layer_norm, 4 dense_decoder_input)
//   f64 dropout_p | f64 forget_bias
//   u32 tensor_count | u64 size per tensor
//   f64[P] parameters in ModelParams::visit order
//   u64 adam_step | f64 beta1 | f64 beta2 | f64 eps | f64[P] m | f64[P] v
//   u64 trailer_length | JSON {"norm_2d","norm_3d","skeleton","train_state"}
std::string encode_checkpoint(const Checkpoint& ckpt);
Checkpoint decode_checkpoint(const std::string& bytes);

void save_checkpoint(const Checkpoint& ckpt, const std::string& path);

struct ExpectedDims {
  std::size_t input_dim;
  std::size_t output_dim;
};
// Throws before returning anything when the file is truncated, has an
// unknown version, or does not match `expected`.
Checkpoint load_checkpoint(const std::string& path, std::optional<ExpectedDims> expected = std::nullopt);

}  // namespace poselift::model
