#pragma once

#include <span>
#include <vector>

#include <nlohmann/json.hpp>

#include "kernel/matrix.hpp"
#include "skeleton/skeleton.hpp"

namespace poselift::loss {

using kernel::Tensor3;

// alpha weighs the MSE term, beta the temporal smoothness term; eta, rho and
// tau weigh the frame differences of the torso/head, leg and arm joints.
struct LossWeights {
  double alpha = 1.0;
  double beta = 5.0;
  double eta = 1.0;
  double rho = 2.5;
  double tau = 4.0;

  void validate() const;
  nlohmann::json to_json() const;
  friend bool operator==(const LossWeights&, const LossWeights&) = default;
};

// Per-coordinate smoothness weight over the root-removed 3D coordinate vector.
std::vector<double> coordinate_weights(const skeleton::SkeletonSpec& spec, const LossWeights& w);

// (1/(N T)) sum_i sum_t ||pred_it - target_it||^2
double mse_term(const Tensor3& pred, const Tensor3& target);

// (1/(N (T-1))) sum_i sum_{t>=1} sum_k w_k (pred_it,k - pred_i(t-1),k)^2
double smoothness_term(const Tensor3& pred, std::span<const double> coord_weights);
double smoothness_term(const Tensor3& pred, const skeleton::SkeletonSpec& spec, const LossWeights& w);

struct LossResult {
  double total = 0.0;
  double mse = 0.0;
  double smoothness = 0.0;  // unweighted by beta; 0 when beta == 0
  Tensor3 grad;             // d total / d pred
};

// alpha * mse + beta * smoothness and its exact gradient. With beta == 0 the
// smoothness term is skipped, so T == 1 is allowed.
LossResult total_loss_with_grad(const Tensor3& pred, const Tensor3& target,
                                std::span<const double> coord_weights, const LossWeights& w);

double total_loss(const Tensor3& pred, const Tensor3& target, const skeleton::SkeletonSpec& spec,
                  const LossWeights& w);
Tensor3 total_loss_grad(const Tensor3& pred, const Tensor3& target, const skeleton::SkeletonSpec& spec,
                        const LossWeights& w);

}  // namespace poselift::loss
