#include "kernel/layer_norm.hpp"

#include <cmath>
#include <string>

#include "common/error.hpp"

namespace poselift::kernel {

Matrix SegmentedLayerNorm::forward(const Matrix& x, std::size_t segment_width,
                                   std::span<const double> gain, std::span<const double> bias) {
  require(segment_width >= 2, ErrorCode::kInvalidArgument,
          "layer_norm: normalized length must be >= 2, got " + std::to_string(segment_width));
  require(x.cols() % segment_width == 0 && gain.size() == x.cols() && bias.size() == x.cols(),
          ErrorCode::kShapeMismatch, "layer_norm: gain/bias/segment do not match input width");
  segment = segment_width;
  const std::size_t segs = x.cols() / segment;
  xhat = Matrix(x.rows(), x.cols());
  rstd.assign(x.rows() * segs, 0.0);
  Matrix y(x.rows(), x.cols());
  const double inv_w = 1.0 / static_cast<double>(segment);
  for (std::size_t r = 0; r < x.rows(); ++r) {
    auto xr = x.row(r);
    auto hr = xhat.row(r);
    auto yr = y.row(r);
    for (std::size_t s = 0; s < segs; ++s) {
      const std::size_t off = s * segment;
      double mean = 0.0;
      for (std::size_t j = 0; j < segment; ++j) mean += xr[off + j];
      mean *= inv_w;
      double var = 0.0;
      for (std::size_t j = 0; j < segment; ++j) {
        const double c = xr[off + j] - mean;
        var += c * c;
      }
      var *= inv_w;
      const double rs = 1.0 / std::sqrt(var + kLayerNormEps);
      rstd[r * segs + s] = rs;
      for (std::size_t j = 0; j < segment; ++j) {
        const std::size_t k = off + j;
        hr[k] = (xr[k] - mean) * rs;
        yr[k] = gain[k] * hr[k] + bias[k];
      }
    }
  }
  return y;
}

Matrix SegmentedLayerNorm::backward(const Matrix& dy, std::span<const double> gain,
                                    std::span<double> dgain, std::span<double> dbias) const {
  require(dy.rows() == xhat.rows() && dy.cols() == xhat.cols(), ErrorCode::kShapeMismatch,
          "layer_norm backward: cotangent shape");
  const std::size_t segs = xhat.cols() / segment;
  const double inv_w = 1.0 / static_cast<double>(segment);
  Matrix dx(dy.rows(), dy.cols());
  for (std::size_t r = 0; r < dy.rows(); ++r) {
    auto dyr = dy.row(r);
    auto hr = xhat.row(r);
    auto dxr = dx.row(r);
    for (std::size_t s = 0; s < segs; ++s) {
      const std::size_t off = s * segment;
      double mean_g = 0.0, mean_gh = 0.0;
      for (std::size_t j = 0; j < segment; ++j) {
        const std::size_t k = off + j;
        dgain[k] += dyr[k] * hr[k];
        dbias[k] += dyr[k];
        const double g = dyr[k] * gain[k];
        mean_g += g;
        mean_gh += g * hr[k];
      }
      mean_g *= inv_w;
      mean_gh *= inv_w;
      const double rs = rstd[r * segs + s];
      for (std::size_t j = 0; j < segment; ++j) {
        const std::size_t k = off + j;
        dxr[k] = rs * (dyr[k] * gain[k] - mean_g - hr[k] * mean_gh);
      }
    }
  }
  return dx;
}

std::vector<double> layer_norm(std::span<const double> x, std::span<const double> gain,
                               std::span<const double> bias) {
  require(gain.size() == x.size() && bias.size() == x.size(), ErrorCode::kShapeMismatch,
          "layer_norm: gain/bias length must equal input length");
  SegmentedLayerNorm ln;
  Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  Matrix y = ln.forward(in, x.size(), gain, bias);
  return {y.values().begin(), y.values().end()};
}

LayerNormGrads layer_norm_backward(std::span<const double> x, std::span<const double> gain,
                                   std::span<const double> dy) {
  require(dy.size() == x.size(), ErrorCode::kShapeMismatch, "layer_norm_backward: length");
  SegmentedLayerNorm ln;
  std::vector<double> zero(x.size(), 0.0);
  Matrix in(1, x.size(), std::vector<double>(x.begin(), x.end()));
  ln.forward(in, x.size(), gain, zero);
  LayerNormGrads g;
  g.dgain.assign(x.size(), 0.0);
  g.dbias.assign(x.size(), 0.0);
  Matrix d(1, dy.size(), std::vector<double>(dy.begin(), dy.end()));
  Matrix dx = ln.backward(d, gain, g.dgain, g.dbias);
  g.dx.assign(dx.values().begin(), dx.values().end());
  return g;
}

}  // namespace poselift::kernel
