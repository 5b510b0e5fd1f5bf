#include "model/lstm_cell.hpp"

#include <cmath>

#include "common/error.hpp"
#include "kernel/init.hpp"

namespace poselift::model {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

void check_shapes(const LstmCellParams& p, const Matrix& x, const Matrix& h, const Matrix& c) {
  require(x.cols() == p.input && h.cols() == p.hidden && c.cols() == p.hidden &&
              h.rows() == x.rows() && c.rows() == x.rows(),
          ErrorCode::kShapeMismatch,
          "lstm cell: expected input " + std::to_string(p.input) + " hidden " +
              std::to_string(p.hidden) + ", got x " + std::to_string(x.rows()) + "x" +
              std::to_string(x.cols()) + " h " + std::to_string(h.rows()) + "x" +
              std::to_string(h.cols()));
}

}  // namespace

LstmCellParams LstmCellParams::zeros(std::size_t input, std::size_t hidden) {
  LstmCellParams p;
  p.input = input;
  p.hidden = hidden;
  p.w_x = Matrix(input, 4 * hidden);
  p.w_h = Matrix(hidden, 4 * hidden);
  p.bias.assign(4 * hidden, 0.0);
  p.ln_x_gain.assign(4 * hidden, 0.0);
  p.ln_x_bias.assign(4 * hidden, 0.0);
  p.ln_h_gain.assign(4 * hidden, 0.0);
  p.ln_h_bias.assign(4 * hidden, 0.0);
  p.ln_c_gain.assign(hidden, 0.0);
  p.ln_c_bias.assign(hidden, 0.0);
  return p;
}

LstmCellParams LstmCellParams::init(std::size_t input, std::size_t hidden, Rng& rng,
                                    double forget_bias) {
  require(input > 0 && hidden >= 2, ErrorCode::kInvalidArgument,
          "lstm cell: input must be > 0 and hidden >= 2");
  LstmCellParams p = zeros(input, hidden);
  p.w_x = kernel::xavier_uniform(input, 4 * hidden, rng);
  p.w_h = kernel::xavier_uniform(hidden, 4 * hidden, rng);
  for (std::size_t k = hidden; k < 2 * hidden; ++k) p.bias[k] = forget_bias;
  p.ln_x_gain.assign(4 * hidden, 1.0);
  p.ln_h_gain.assign(4 * hidden, 1.0);
  p.ln_c_gain.assign(hidden, 1.0);
  return p;
}

void LstmCellParams::visit(const std::function<void(const std::string&, std::span<double>)>& fn) {
  fn("w_x", w_x.values());
  fn("w_h", w_h.values());
  fn("bias", bias);
  fn("ln_x_gain", ln_x_gain);
  fn("ln_x_bias", ln_x_bias);
  fn("ln_h_gain", ln_h_gain);
  fn("ln_h_bias", ln_h_bias);
  fn("ln_c_gain", ln_c_gain);
  fn("ln_c_bias", ln_c_bias);
}

void LstmCellParams::visit(
    const std::function<void(const std::string&, std::span<const double>)>& fn) const {
  fn("w_x", w_x.values());
  fn("w_h", w_h.values());
  fn("bias", bias);
  fn("ln_x_gain", ln_x_gain);
  fn("ln_x_bias", ln_x_bias);
  fn("ln_h_gain", ln_h_gain);
  fn("ln_h_bias", ln_h_bias);
  fn("ln_c_gain", ln_c_gain);
  fn("ln_c_bias", ln_c_bias);
}

CellState cell_step(const LstmCellParams& p, const Matrix& x_raw, const Matrix& h_prev,
                    const Matrix& c_prev, const Matrix* dropout_mask, const CellOptions& options,
                    CellCache* cache) {
  check_shapes(p, x_raw, h_prev, c_prev);
  const std::size_t n = x_raw.rows(), hd = p.hidden;

  Matrix x = x_raw;
  if (dropout_mask != nullptr) {
    require(dropout_mask->rows() == x.rows() && dropout_mask->cols() == x.cols(),
            ErrorCode::kShapeMismatch, "lstm cell: dropout mask shape");
    for (std::size_t k = 0; k < x.size(); ++k) x.values()[k] *= dropout_mask->values()[k];
  }

  Matrix ax(n, 4 * hd), ah(n, 4 * hd);
  kernel::matmul_acc(x, p.w_x, ax);
  kernel::matmul_acc(h_prev, p.w_h, ah);

  CellCache local;
  CellCache& cc = cache != nullptr ? *cache : local;
  Matrix pre;
  if (options.layer_norm) {
    pre = cc.ln_x.forward(ax, hd, p.ln_x_gain, p.ln_x_bias);
    Matrix nh = cc.ln_h.forward(ah, hd, p.ln_h_gain, p.ln_h_bias);
    for (std::size_t k = 0; k < pre.size(); ++k) pre.values()[k] += nh.values()[k];
  } else {
    pre = std::move(ax);
    for (std::size_t k = 0; k < pre.size(); ++k) pre.values()[k] += ah.values()[k];
  }
  kernel::add_row_vector(pre, p.bias);

  Matrix gates(n, 4 * hd);
  CellState out{Matrix(n, hd), Matrix(n, hd)};
  for (std::size_t r = 0; r < n; ++r) {
    auto pr = pre.row(r);
    auto gr = gates.row(r);
    for (std::size_t k = 0; k < hd; ++k) {
      gr[k] = sigmoid(pr[k]);
      gr[hd + k] = sigmoid(pr[hd + k]);
      gr[2 * hd + k] = std::tanh(pr[2 * hd + k]);
      gr[3 * hd + k] = sigmoid(pr[3 * hd + k]);
      out.c(r, k) = gr[hd + k] * c_prev(r, k) + gr[k] * gr[2 * hd + k];
    }
  }

  Matrix tanh_c = options.layer_norm ? cc.ln_c.forward(out.c, hd, p.ln_c_gain, p.ln_c_bias) : out.c;
  for (double& v : tanh_c.values()) v = std::tanh(v);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < hd; ++k) out.h(r, k) = gates(r, 3 * hd + k) * tanh_c(r, k);

  if (cache != nullptr) {
    cc.x = std::move(x);
    cc.mask = dropout_mask != nullptr ? *dropout_mask : Matrix();
    cc.h_prev = h_prev;
    cc.c_prev = c_prev;
    cc.gates = std::move(gates);
    cc.tanh_c = std::move(tanh_c);
  }
  return out;
}

CellGradients cell_backward(const LstmCellParams& p, const CellCache& cache, const Matrix& dh,
                            const Matrix& dc, const CellOptions& options, LstmCellParams& grads,
                            bool want_dx) {
  const std::size_t n = cache.h_prev.rows(), hd = p.hidden;
  require(dh.rows() == n && dh.cols() == hd && dc.rows() == n && dc.cols() == hd,
          ErrorCode::kShapeMismatch, "lstm cell backward: cotangent shape");
  const Matrix& g = cache.gates;

  // Through h = o * tanh(LN_c(c)).
  Matrix d_ln_c_out(n, hd);
  Matrix dpre(n, 4 * hd);
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < hd; ++k) {
      const double o = g(r, 3 * hd + k), tc = cache.tanh_c(r, k);
      d_ln_c_out(r, k) = dh(r, k) * o * (1.0 - tc * tc);
      dpre(r, 3 * hd + k) = dh(r, k) * tc * o * (1.0 - o);
    }
  Matrix dc_total = options.layer_norm
                        ? cache.ln_c.backward(d_ln_c_out, p.ln_c_gain, grads.ln_c_gain, grads.ln_c_bias)
                        : std::move(d_ln_c_out);

  CellGradients out{Matrix(), Matrix(n, hd), Matrix(n, hd)};
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t k = 0; k < hd; ++k) {
      const double dct = dc_total(r, k) + dc(r, k);
      const double i = g(r, k), f = g(r, hd + k), cand = g(r, 2 * hd + k);
      dpre(r, k) = dct * cand * i * (1.0 - i);
      dpre(r, hd + k) = dct * cache.c_prev(r, k) * f * (1.0 - f);
      dpre(r, 2 * hd + k) = dct * i * (1.0 - cand * cand);
      out.dc_prev(r, k) = dct * f;
    }

  kernel::accumulate_column_sums(dpre, grads.bias);
  Matrix dax, dah;
  if (options.layer_norm) {
    dax = cache.ln_x.backward(dpre, p.ln_x_gain, grads.ln_x_gain, grads.ln_x_bias);
    dah = cache.ln_h.backward(dpre, p.ln_h_gain, grads.ln_h_gain, grads.ln_h_bias);
  } else {
    dax = dpre;
    dah = std::move(dpre);
  }

  kernel::matmul_tn_acc(cache.x, dax, grads.w_x);
  kernel::matmul_tn_acc(cache.h_prev, dah, grads.w_h);
  out.dh_prev = kernel::matmul_nt(dah, p.w_h);
  if (want_dx) {
    out.dx = kernel::matmul_nt(dax, p.w_x);
    if (!cache.mask.empty())
      for (std::size_t k = 0; k < out.dx.size(); ++k) out.dx.values()[k] *= cache.mask.values()[k];
  }
  return out;
}

}  // namespace poselift::model
