#include "trainer/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <set>

#include "common/error.hpp"
#include "common/log.hpp"
#include "common/rng.hpp"
#include "kernel/adam.hpp"
#include "loss/loss.hpp"
#include "model/seq2seq.hpp"
#include "pipeline/windows.hpp"

namespace poselift::trainer {

namespace fs = std::filesystem;

TrainData split_for_validation(const std::vector<pipeline::PoseSequence>& all, const TrainConfig& cfg) {
  TrainData d;
  if (!cfg.val_subjects.empty()) {
    const std::set<std::string> held(cfg.val_subjects.begin(), cfg.val_subjects.end());
    for (const auto& s : all) (held.count(s.subject) ? d.val : d.train).push_back(s);
    return d;
  }
  const auto n_val = static_cast<std::size_t>(std::floor(cfg.val_fraction * static_cast<double>(all.size())));
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(cfg.seed).split("val_split");
  for (std::size_t i = order.size(); i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  std::vector<bool> is_val(all.size(), false);
  for (std::size_t k = 0; k < n_val; ++k) is_val[order[k]] = true;
  for (std::size_t i = 0; i < all.size(); ++i) (is_val[i] ? d.val : d.train).push_back(all[i]);
  return d;
}

namespace {

struct Prepared {
  std::vector<pipeline::PreparedSequence> seqs;
  std::vector<pipeline::WindowRef> windows;
};

Prepared prepare_training(const std::vector<pipeline::PoseSequence>& data, const skeleton::SkeletonSpec& spec,
                          std::size_t T) {
  Prepared p;
  for (const auto& s : data) {
    if (!s.has_3d()) {
      log(LogLevel::kWarning, "skipping sequence " + s.subject + "/" + s.action + ": no 3D ground truth");
      continue;
    }
    if (s.length() < T) {
      log(LogLevel::kWarning, "skipping sequence " + s.subject + "/" + s.action + ": " +
                                  std::to_string(s.length()) + " frames < window " + std::to_string(T));
      continue;
    }
    p.seqs.push_back(pipeline::prepare(s, spec));
  }
  for (std::size_t i = 0; i < p.seqs.size(); ++i)
    for (std::size_t start : pipeline::window_starts(p.seqs[i].inputs_2d.rows(), T))
      p.windows.push_back({i, start});
  return p;
}

kernel::Matrix stack_rows(const std::vector<pipeline::PreparedSequence>& seqs, bool three_d) {
  std::size_t rows = 0, cols = 0;
  for (const auto& s : seqs) {
    const auto& m = three_d ? s.targets_3d : s.inputs_2d;
    rows += m.rows();
    cols = m.cols();
  }
  kernel::Matrix out(rows, cols);
  std::size_t r = 0;
  for (const auto& s : seqs) {
    const auto& m = three_d ? s.targets_3d : s.inputs_2d;
    std::copy(m.values().begin(), m.values().end(), out.data() + r * cols);
    r += m.rows();
  }
  return out;
}

std::vector<std::size_t> epoch_order(std::size_t n, std::uint64_t seed, std::uint64_t epoch) {
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng = Rng(seed).split("shuffle").split(epoch);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[rng.below(i)]);
  return order;
}

void clip_global_norm(model::ModelParams& grads, double max_norm) {
  if (max_norm <= 0.0) return;
  double sq = 0.0;
  grads.visit([&](const std::string&, std::span<const double> v) {
    for (double x : v) sq += x * x;
  });
  const double norm = std::sqrt(sq);
  if (!(norm > max_norm)) return;
  const double scale = max_norm / norm;
  grads.visit([&](const std::string&, std::span<double> v) {
    for (double& x : v) x *= scale;
  });
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string checkpoint_name(std::uint64_t step) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "ckpt_step%08llu.plft", static_cast<unsigned long long>(step));
  return buf;
}

}  // namespace

TrainResult train(const TrainConfig& cfg, const TrainData& data, const skeleton::SkeletonSpec& spec,
                  const std::string& out_dir) {
  cfg.validate();
  const std::size_t T = cfg.seq_len;
  Prepared tr = prepare_training(data.train, spec, T);
  require(!tr.windows.empty(), ErrorCode::kInvalidArgument,
          "training data yields no windows of length " + std::to_string(T));
  std::vector<pipeline::PoseSequence> val;
  for (const auto& s : data.val)
    if (s.has_3d() && s.length() >= T) val.push_back(s);

  const std::size_t in_dim = (spec.n_joints() - 1) * 2, out_dim = (spec.n_joints() - 1) * 3;
  const model::ModelConfig mcfg = cfg.model_config(in_dim, out_dim);
  const loss::LossWeights weights = cfg.effective_loss();
  const std::vector<double> coord_w = loss::coordinate_weights(spec, weights);

  std::optional<model::Checkpoint> state;
  if (!cfg.resume_from.empty()) {
    state = model::load_checkpoint(cfg.resume_from, model::ExpectedDims{in_dim, out_dim});
    require(state->params.config == mcfg, ErrorCode::kConfig,
            "resume: checkpoint model configuration differs from the requested configuration");
    require(state->skeleton == spec, ErrorCode::kConfig, "resume: checkpoint skeleton differs");
  } else {
    Rng init_rng = Rng(cfg.seed).split("init");
    model::ModelParams params = model::ModelParams::init(mcfg, init_rng);
    auto sizes = params.tensor_sizes();
    state.emplace(model::Checkpoint{std::move(params), kernel::AdamState::for_sizes(sizes),
                                    pipeline::fit_norm(stack_rows(tr.seqs, false)),
                                    pipeline::fit_norm(stack_rows(tr.seqs, true)), spec, nlohmann::json::object()});
  }
  model::Checkpoint& ck = *state;

  const std::size_t n_windows = tr.windows.size();
  const std::size_t per_epoch = (n_windows + cfg.batch_size - 1) / cfg.batch_size;
  std::uint64_t total = static_cast<std::uint64_t>(per_epoch) * cfg.epochs;
  const std::uint64_t first = ck.optimizer.step_count;
  if (cfg.max_steps > 0) total = std::min<std::uint64_t>(total, cfg.max_steps);
  require(first <= total, ErrorCode::kConfig, "resume: checkpoint is already past the requested number of steps");

  const bool write = !out_dir.empty();
  std::ofstream metrics;
  if (write) {
    fs::create_directories(out_dir);
    metrics.open(fs::path(out_dir) / "metrics.csv", std::ios::binary | std::ios::trunc);
    require(metrics.good(), ErrorCode::kIo, "cannot write metrics log in '" + out_dir + "'");
    metrics << kMetricsHeader << '\n';
  }

  auto save = [&](std::uint64_t step) {
    ck.train_state = {{"config", cfg.identity_json()},
                      {"step", step},
                      {"epoch", step / per_epoch},
                      {"windows", n_windows}};
    if (!write) return std::string();
    const auto path = (fs::path(out_dir) / checkpoint_name(step)).string();
    model::save_checkpoint(ck, path);
    model::save_checkpoint(ck, (fs::path(out_dir) / "latest.plft").string());
    return path;
  };

  TrainResult res;
  res.first_step = first;
  res.n_windows = n_windows;
  const Rng dropout_base = Rng(cfg.seed).split("dropout");
  std::vector<std::size_t> order;
  std::uint64_t order_epoch = ~std::uint64_t{0};
  double epoch_sum = 0.0;
  std::size_t epoch_count = 0;
  std::vector<kernel::ParamRef> prefs;
  std::vector<kernel::GradRef> grefs;

  for (std::uint64_t step = first; step < total; ++step) {
    const std::uint64_t epoch = step / per_epoch;
    const std::size_t b = static_cast<std::size_t>(step % per_epoch);
    if (epoch != order_epoch) {
      order = epoch_order(n_windows, cfg.seed, epoch);
      order_epoch = epoch;
    }
    const std::size_t lo = b * cfg.batch_size, hi = std::min(n_windows, lo + cfg.batch_size);
    std::vector<pipeline::WindowRef> refs;
    refs.reserve(hi - lo);
    for (std::size_t k = lo; k < hi; ++k) refs.push_back(tr.windows[order[k]]);
    const auto batch = pipeline::assemble_batch(tr.seqs, refs, T, ck.stats_2d, ck.stats_3d);

    Rng drop = dropout_base.split(step);
    auto fwd = model::forward(ck.params, batch.inputs_2d, model::Mode::kTrain, &drop);
    auto lr = loss::total_loss_with_grad(fwd.predictions, batch.targets_3d, coord_w, weights);
    require(std::isfinite(lr.total), ErrorCode::kNumeric,
            "training diverged: non-finite loss at step " + std::to_string(step));
    model::ModelParams grads = model::backward(ck.params, fwd.tape, lr.grad);
    clip_global_norm(grads, cfg.grad_clip);

    prefs.clear();
    grefs.clear();
    std::vector<std::string> names;
    ck.params.visit([&](const std::string& n, std::span<double> v) {
      names.push_back(n);
      prefs.push_back({{}, v});
    });
    grads.visit([&](const std::string&, std::span<const double> v) { grefs.push_back({{}, v}); });
    for (std::size_t i = 0; i < names.size(); ++i) prefs[i].name = grefs[i].name = names[i];
    const double rate = lr_at(step, cfg);
    kernel::adam_step(prefs, grefs, ck.optimizer, rate);

    res.step_losses.push_back(lr.total);
    epoch_sum += lr.total;
    ++epoch_count;
    const bool epoch_end = b + 1 == per_epoch || step + 1 == total;
    std::string val_field;
    if (epoch_end) {
      res.epoch_mean_losses.push_back(epoch_sum / static_cast<double>(epoch_count));
      epoch_sum = 0.0;
      epoch_count = 0;
      if (!val.empty()) {
        const evaluator::Lifter lifter{ck.params, ck.stats_2d, ck.stats_3d, spec};
        const double v = evaluator::evaluate(lifter, val, 1).overall_frames;
        res.val_mpjpe.push_back(v);
        val_field = fmt(v);
      }
      log(LogLevel::kInfo, "epoch " + std::to_string(epoch) + " mean loss " + fmt(res.epoch_mean_losses.back()) +
                               (val_field.empty() ? "" : " val mpjpe " + val_field));
    }
    if (write) metrics << step << ',' << epoch << ',' << fmt(rate) << ',' << fmt(lr.total) << ',' << val_field << '\n';
    if (epoch_end && step + 1 != total && (epoch + 1) % cfg.checkpoint_every_epochs == 0) save(step + 1);
  }
  if (write) {
    metrics.flush();
    require(metrics.good(), ErrorCode::kIo, "write failed for metrics log");
  }
  res.last_step = total;
  res.final_checkpoint = save(total);
  res.checkpoint = ck;
  return res;
}

TrainResult ablation_run(TrainConfig cfg, const AblationToggles& toggles, const TrainData& data,
                         const skeleton::SkeletonSpec& spec, const std::string& out_dir) {
  cfg.ablation = toggles;
  return train(cfg, data, spec, out_dir);
}

}  // namespace poselift::trainer
