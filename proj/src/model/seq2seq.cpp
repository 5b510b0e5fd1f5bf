#include "model/seq2seq.hpp"

#include <cmath>

#include "common/error.hpp"
#include "kernel/init.hpp"

namespace poselift::model {

using nlohmann::json;

void ModelConfig::validate() const {
  require(input_dim > 0 && output_dim > 0, ErrorCode::kConfig, "model: input/output dims must be > 0");
  require(hidden >= 2, ErrorCode::kConfig, "model: hidden size must be >= 2");
  require(seq_len >= 1, ErrorCode::kConfig, "model: seq_len must be >= 1");
  require(dropout_p >= 0.0 && dropout_p < 1.0, ErrorCode::kConfig, "model: dropout_p must be in [0, 1)");
  require(std::isfinite(forget_bias), ErrorCode::kConfig, "model: forget_bias must be finite");
}

json ModelConfig::to_json() const {
  return {{"input_dim", input_dim},   {"output_dim", output_dim},   {"hidden", hidden},
          {"seq_len", seq_len},       {"dropout_p", dropout_p},     {"forget_bias", forget_bias},
          {"residual", residual},     {"layer_norm", layer_norm},
          {"dense_decoder_input", dense_decoder_input}};
}

ModelConfig ModelConfig::from_json(const json& j) {
  ModelConfig c;
  c.input_dim = j.at("input_dim").get<std::size_t>();
  c.output_dim = j.at("output_dim").get<std::size_t>();
  c.hidden = j.at("hidden").get<std::size_t>();
  c.seq_len = j.at("seq_len").get<std::size_t>();
  c.dropout_p = j.at("dropout_p").get<double>();
  c.forget_bias = j.at("forget_bias").get<double>();
  c.residual = j.at("residual").get<bool>();
  c.layer_norm = j.at("layer_norm").get<bool>();
  c.dense_decoder_input = j.at("dense_decoder_input").get<bool>();
  c.validate();
  return c;
}

ModelParams ModelParams::init(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p;
  p.config = config;
  Rng enc_rng = rng.split("encoder");
  Rng dec_rng = rng.split("decoder");
  Rng out_rng = rng.split("output");
  p.encoder = LstmCellParams::init(config.input_dim, config.hidden, enc_rng, config.forget_bias);
  p.decoder = LstmCellParams::init(config.output_dim, config.hidden, dec_rng, config.forget_bias);
  if (config.dense_decoder_input) {
    Rng in_rng = rng.split("decoder_input");
    p.dec_in_w = kernel::xavier_uniform(config.output_dim, config.output_dim, in_rng);
    p.dec_in_b.assign(config.output_dim, 0.0);
  }
  p.out_w = kernel::xavier_uniform(config.hidden, config.output_dim, out_rng);
  p.out_b.assign(config.output_dim, 0.0);
  return p;
}

ModelParams ModelParams::zeros_like() const {
  ModelParams z;
  z.config = config;
  z.encoder = LstmCellParams::zeros(encoder.input, encoder.hidden);
  z.decoder = LstmCellParams::zeros(decoder.input, decoder.hidden);
  z.dec_in_w = Matrix(dec_in_w.rows(), dec_in_w.cols());
  z.dec_in_b.assign(dec_in_b.size(), 0.0);
  z.out_w = Matrix(out_w.rows(), out_w.cols());
  z.out_b.assign(out_b.size(), 0.0);
  return z;
}

void ModelParams::visit(const std::function<void(const std::string&, std::span<double>)>& fn) {
  encoder.visit([&](const std::string& n, std::span<double> v) { fn("encoder." + n, v); });
  decoder.visit([&](const std::string& n, std::span<double> v) { fn("decoder." + n, v); });
  if (config.dense_decoder_input) {
    fn("decoder_input.w", dec_in_w.values());
    fn("decoder_input.b", dec_in_b);
  }
  fn("output.w", out_w.values());
  fn("output.b", out_b);
}

void ModelParams::visit(
    const std::function<void(const std::string&, std::span<const double>)>& fn) const {
  encoder.visit([&](const std::string& n, std::span<const double> v) { fn("encoder." + n, v); });
  decoder.visit([&](const std::string& n, std::span<const double> v) { fn("decoder." + n, v); });
  if (config.dense_decoder_input) {
    fn("decoder_input.w", dec_in_w.values());
    fn("decoder_input.b", dec_in_b);
  }
  fn("output.w", out_w.values());
  fn("output.b", out_b);
}

std::vector<std::size_t> ModelParams::tensor_sizes() const {
  std::vector<std::size_t> sizes;
  visit([&](const std::string&, std::span<const double> v) { sizes.push_back(v.size()); });
  return sizes;
}

std::size_t ModelParams::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t s : tensor_sizes()) n += s;
  return n;
}

std::vector<double> ModelParams::flatten() const {
  std::vector<double> flat;
  flat.reserve(parameter_count());
  visit([&](const std::string&, std::span<const double> v) { flat.insert(flat.end(), v.begin(), v.end()); });
  return flat;
}

void ModelParams::assign_flat(std::span<const double> values) {
  require(values.size() == parameter_count(), ErrorCode::kShapeMismatch,
          "assign_flat: expected " + std::to_string(parameter_count()) + " values");
  std::size_t off = 0;
  visit([&](const std::string&, std::span<double> v) {
    std::copy(values.begin() + static_cast<std::ptrdiff_t>(off),
              values.begin() + static_cast<std::ptrdiff_t>(off + v.size()), v.begin());
    off += v.size();
  });
}

namespace {

Matrix dropout_mask(std::size_t rows, std::size_t cols, double p, Rng& rng) {
  Matrix m(rows, cols);
  const double scale = 1.0 / (1.0 - p);
  for (double& v : m.values()) v = rng.uniform() >= p ? scale : 0.0;
  return m;
}

void check_finite(const Matrix& m, const char* side, std::size_t step) {
  require(m.all_finite(), ErrorCode::kNumeric,
          std::string("non-finite activation in ") + side + " at timestep " + std::to_string(step));
}

}  // namespace

ForwardResult forward(const ModelParams& params, const Tensor3& inputs_2d, Mode mode, Rng* rng) {
  const ModelConfig& cfg = params.config;
  require(inputs_2d.d == cfg.input_dim, ErrorCode::kShapeMismatch,
          "forward: input dimension " + std::to_string(inputs_2d.d) + " != model input " +
              std::to_string(cfg.input_dim));
  require(inputs_2d.n > 0, ErrorCode::kShapeMismatch, "forward: empty batch");
  require(inputs_2d.t == cfg.seq_len, ErrorCode::kShapeMismatch,
          "forward: window length " + std::to_string(inputs_2d.t) + " != model seq_len " +
              std::to_string(cfg.seq_len));
  const bool drop = mode == Mode::kTrain && cfg.dropout_p > 0.0;
  require(!drop || rng != nullptr, ErrorCode::kInvalidArgument, "forward: train mode with dropout needs an rng");

  const std::size_t n = inputs_2d.n, steps = inputs_2d.t, hd = cfg.hidden, d = cfg.output_dim;
  const CellOptions copt{cfg.layer_norm};
  ForwardResult res;
  res.predictions = Tensor3(n, steps, d);
  ForwardTape& tape = res.tape;
  tape.batch = n;
  tape.steps = steps;
  tape.encoder.resize(steps);
  tape.decoder.resize(steps);
  tape.dec_inputs.resize(steps);
  tape.dec_h.resize(steps);

  CellState state{Matrix(n, hd), Matrix(n, hd)};
  for (std::size_t t = 0; t < steps; ++t) {
    const Matrix x = inputs_2d.time_slice(t);
    Matrix mask;
    if (drop) mask = dropout_mask(n, cfg.input_dim, cfg.dropout_p, *rng);
    state = cell_step(params.encoder, x, state.h, state.c, drop ? &mask : nullptr, copt, &tape.encoder[t]);
    check_finite(state.h, "encoder", t);
  }

  Matrix input(n, d, 1.0);  // START token
  for (std::size_t t = 0; t < steps; ++t) {
    Matrix cell_in = input;
    if (cfg.dense_decoder_input) {
      cell_in = kernel::matmul(input, params.dec_in_w);
      kernel::add_row_vector(cell_in, params.dec_in_b);
    }
    Matrix mask;
    if (drop) mask = dropout_mask(n, d, cfg.dropout_p, *rng);
    state = cell_step(params.decoder, cell_in, state.h, state.c, drop ? &mask : nullptr, copt, &tape.decoder[t]);
    check_finite(state.h, "decoder", t);

    Matrix y = cfg.residual ? input : Matrix(n, d);
    kernel::matmul_acc(state.h, params.out_w, y);
    kernel::add_row_vector(y, params.out_b);
    check_finite(y, "decoder output", t);
    res.predictions.set_time_slice(t, y);
    tape.dec_inputs[t] = std::move(input);
    tape.dec_h[t] = state.h;
    input = std::move(y);
  }
  return res;
}

ModelParams backward(const ModelParams& params, const ForwardTape& tape, const Tensor3& d_pred) {
  const ModelConfig& cfg = params.config;
  require(d_pred.n == tape.batch && d_pred.t == tape.steps && d_pred.d == cfg.output_dim,
          ErrorCode::kShapeMismatch, "backward: cotangent shape does not match the tape");
  const std::size_t n = tape.batch, hd = cfg.hidden, d = cfg.output_dim;
  const CellOptions copt{cfg.layer_norm};
  ModelParams grads = params.zeros_like();

  Matrix dh(n, hd), dc(n, hd), d_next_input(n, d);
  for (std::size_t k = tape.steps; k-- > 0;) {
    Matrix dy = d_pred.time_slice(k);
    for (std::size_t i = 0; i < dy.size(); ++i) dy.values()[i] += d_next_input.values()[i];

    kernel::matmul_tn_acc(tape.dec_h[k], dy, grads.out_w);
    kernel::accumulate_column_sums(dy, grads.out_b);
    Matrix dh_total = kernel::matmul_nt(dy, params.out_w);
    for (std::size_t i = 0; i < dh_total.size(); ++i) dh_total.values()[i] += dh.values()[i];

    // Step 0 reads the constant START token: its input gradient only matters
    // for the dense input layer.
    const bool want_dx = k > 0 || cfg.dense_decoder_input;
    CellGradients cg = cell_backward(params.decoder, tape.decoder[k], dh_total, dc, copt, grads.decoder, want_dx);
    dh = std::move(cg.dh_prev);
    dc = std::move(cg.dc_prev);
    if (want_dx) {
      Matrix d_in = cfg.residual ? dy : Matrix(n, d);
      if (cfg.dense_decoder_input) {
        kernel::matmul_tn_acc(tape.dec_inputs[k], cg.dx, grads.dec_in_w);
        kernel::accumulate_column_sums(cg.dx, grads.dec_in_b);
        Matrix back = kernel::matmul_nt(cg.dx, params.dec_in_w);
        for (std::size_t i = 0; i < d_in.size(); ++i) d_in.values()[i] += back.values()[i];
      } else {
        for (std::size_t i = 0; i < d_in.size(); ++i) d_in.values()[i] += cg.dx.values()[i];
      }
      if (k > 0) d_next_input = std::move(d_in);
    }
  }

  for (std::size_t k = tape.steps; k-- > 0;) {
    CellGradients cg = cell_backward(params.encoder, tape.encoder[k], dh, dc, copt, grads.encoder, false);
    dh = std::move(cg.dh_prev);
    dc = std::move(cg.dc_prev);
  }
  return grads;
}

}  // namespace poselift::model
