#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "common/rng.hpp"
#include "kernel/layer_norm.hpp"
#include "kernel/matrix.hpp"

namespace poselift::model {

using kernel::Matrix;

// Layer-normalized LSTM cell. Gate order in every 4H-wide block: input,
// forget, candidate, output. Pre-activations are
//   LN_x(x W_x) + LN_h(h W_h) + b
// with each gate's H-wide slice normalized on its own, and the cell output is
//   h = sigmoid(o) * tanh(LN_c(c)).
struct LstmCellParams {
  std::size_t input = 0;
  std::size_t hidden = 0;
  Matrix w_x;  // input x 4H
  Matrix w_h;  // H x 4H
  std::vector<double> bias;       // 4H
  std::vector<double> ln_x_gain;  // 4H
  std::vector<double> ln_x_bias;  // 4H
  std::vector<double> ln_h_gain;  // 4H
  std::vector<double> ln_h_bias;  // 4H
  std::vector<double> ln_c_gain;  // H
  std::vector<double> ln_c_bias;  // H

  // Xavier-uniform weights, unit LN gains, zero LN biases, gate bias zero
  // except `forget_bias` on the forget gate.
  static LstmCellParams init(std::size_t input, std::size_t hidden, Rng& rng, double forget_bias);
  static LstmCellParams zeros(std::size_t input, std::size_t hidden);

  // Visits every tensor in storage order with its name.
  void visit(const std::function<void(const std::string&, std::span<double>)>& fn);
  void visit(const std::function<void(const std::string&, std::span<const double>)>& fn) const;

  friend bool operator==(const LstmCellParams&, const LstmCellParams&) = default;
};

struct CellOptions {
  bool layer_norm = true;
};

// Everything the backward pass needs from one forward step.
struct CellCache {
  Matrix x;     // cell input after dropout
  Matrix mask;  // scaled keep mask (0 or 1/(1-p)); empty when no dropout
  Matrix h_prev;
  Matrix c_prev;
  kernel::SegmentedLayerNorm ln_x, ln_h, ln_c;
  Matrix gates;   // activated gates, N x 4H
  Matrix tanh_c;  // tanh(LN_c(c)), N x H
};

struct CellState {
  Matrix h;
  Matrix c;
};

// One step over a batch (rows are batch elements). `dropout_mask` (N x input,
// entries 0 or 1/(1-p)) multiplies the input only; pass nullptr for none.
CellState cell_step(const LstmCellParams& p, const Matrix& x, const Matrix& h_prev,
                    const Matrix& c_prev, const Matrix* dropout_mask, const CellOptions& options,
                    CellCache* cache);

struct CellGradients {
  Matrix dx;  // empty unless requested
  Matrix dh_prev;
  Matrix dc_prev;
};

// Backpropagates (dh, dc) through one step; parameter gradients are
// accumulated into `grads`.
CellGradients cell_backward(const LstmCellParams& p, const CellCache& cache, const Matrix& dh,
                            const Matrix& dc, const CellOptions& options, LstmCellParams& grads,
                            bool want_dx);

}  // namespace poselift::model
