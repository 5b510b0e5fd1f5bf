#include "loss/loss.hpp"

#include <cmath>

#include "common/error.hpp"

namespace poselift::loss {

void LossWeights::validate() const {
  for (double v : {alpha, beta, eta, rho, tau})
    require(std::isfinite(v) && v >= 0.0, ErrorCode::kConfig, "loss weights must be finite and >= 0");
}

nlohmann::json LossWeights::to_json() const {
  return {{"alpha", alpha}, {"beta", beta}, {"eta", eta}, {"rho", rho}, {"tau", tau}};
}

std::vector<double> coordinate_weights(const skeleton::SkeletonSpec& spec, const LossWeights& w) {
  std::vector<double> cw((spec.n_joints() - 1) * 3, 0.0);
  const std::pair<skeleton::JointGroup, double> table[] = {
      {skeleton::JointGroup::kTorsoHead, w.eta},
      {skeleton::JointGroup::kLimbLeg, w.rho},
      {skeleton::JointGroup::kLimbArm, w.tau},
  };
  for (const auto& [g, weight] : table)
    for (std::size_t k : skeleton::group_mask(spec, g, 3)) cw[k] = weight;
  return cw;
}

double mse_term(const Tensor3& pred, const Tensor3& target) {
  require(pred.same_shape(target), ErrorCode::kShapeMismatch, "mse_term: prediction/target shapes differ");
  require(pred.n > 0 && pred.t > 0, ErrorCode::kShapeMismatch, "mse_term: empty tensor");
  double s = 0.0;
  for (std::size_t k = 0; k < pred.data.size(); ++k) {
    const double e = pred.data[k] - target.data[k];
    s += e * e;
  }
  return s / static_cast<double>(pred.n * pred.t);
}

double smoothness_term(const Tensor3& pred, std::span<const double> cw) {
  require(pred.t >= 2, ErrorCode::kInvalidArgument, "smoothness_term: needs T >= 2");
  require(cw.size() == pred.d, ErrorCode::kShapeMismatch, "smoothness_term: weight length != feature dim");
  double s = 0.0;
  for (std::size_t i = 0; i < pred.n; ++i)
    for (std::size_t t = 1; t < pred.t; ++t) {
      auto a = pred.frame(i, t);
      auto b = pred.frame(i, t - 1);
      for (std::size_t k = 0; k < pred.d; ++k) {
        const double diff = a[k] - b[k];
        s += cw[k] * diff * diff;
      }
    }
  return s / static_cast<double>(pred.n * (pred.t - 1));
}

double smoothness_term(const Tensor3& pred, const skeleton::SkeletonSpec& spec, const LossWeights& w) {
  return smoothness_term(pred, coordinate_weights(spec, w));
}

LossResult total_loss_with_grad(const Tensor3& pred, const Tensor3& target,
                                std::span<const double> cw, const LossWeights& w) {
  w.validate();
  LossResult r;
  r.mse = mse_term(pred, target);
  r.grad = Tensor3(pred.n, pred.t, pred.d);
  const double gm = 2.0 * w.alpha / static_cast<double>(pred.n * pred.t);
  for (std::size_t k = 0; k < pred.data.size(); ++k) r.grad.data[k] = gm * (pred.data[k] - target.data[k]);

  if (w.beta != 0.0) {
    r.smoothness = smoothness_term(pred, cw);
    const double gs = 2.0 * w.beta / static_cast<double>(pred.n * (pred.t - 1));
    for (std::size_t i = 0; i < pred.n; ++i)
      for (std::size_t t = 1; t < pred.t; ++t) {
        auto a = pred.frame(i, t);
        auto b = pred.frame(i, t - 1);
        auto ga = r.grad.frame(i, t);
        auto gb = r.grad.frame(i, t - 1);
        for (std::size_t k = 0; k < pred.d; ++k) {
          const double g = gs * cw[k] * (a[k] - b[k]);
          ga[k] += g;
          gb[k] -= g;
        }
      }
  }
  r.total = w.alpha * r.mse + w.beta * r.smoothness;
  return r;
}

double total_loss(const Tensor3& pred, const Tensor3& target, const skeleton::SkeletonSpec& spec,
                  const LossWeights& w) {
  return total_loss_with_grad(pred, target, coordinate_weights(spec, w), w).total;
}

Tensor3 total_loss_grad(const Tensor3& pred, const Tensor3& target, const skeleton::SkeletonSpec& spec,
                        const LossWeights& w) {
  return total_loss_with_grad(pred, target, coordinate_weights(spec, w), w).grad;
}

}  // namespace poselift::loss
