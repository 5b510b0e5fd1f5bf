#include "trainer/train_config.hpp"

#include <cmath>
#include <filesystem>
#include <set>

#include "common/error.hpp"

namespace poselift::trainer {

using nlohmann::json;

namespace {

class Collector {
 public:
  void add(std::string msg) { errors_.push_back(std::move(msg)); }
  void check(bool ok, const std::string& msg) {
    if (!ok) add(msg);
  }
  void throw_if_any() const {
    if (errors_.empty()) return;
    std::string all = "invalid configuration: ";
    for (std::size_t i = 0; i < errors_.size(); ++i) all += (i ? "; " : "") + errors_[i];
    fail(ErrorCode::kConfig, all);
  }

  template <typename T>
  void read(const json& obj, const std::string& key, T& out, const std::string& prefix = "") {
    if (!obj.contains(key)) return;
    const json& v = obj.at(key);
    try {
      if constexpr (std::is_same_v<T, std::size_t> || std::is_same_v<T, std::uint64_t>) {
        if (!v.is_number_unsigned() && !(v.is_number_integer() && v.get<long long>() >= 0)) {
          add("'" + prefix + key + "' must be a non-negative integer");
          return;
        }
      } else if constexpr (std::is_same_v<T, double>) {
        if (!v.is_number()) {
          add("'" + prefix + key + "' must be a number");
          return;
        }
      } else if constexpr (std::is_same_v<T, bool>) {
        if (!v.is_boolean()) {
          add("'" + prefix + key + "' must be true or false");
          return;
        }
      } else if constexpr (std::is_same_v<T, std::string>) {
        if (!v.is_string()) {
          add("'" + prefix + key + "' must be a string");
          return;
        }
      }
      out = v.get<T>();
    } catch (const json::exception&) {
      add("'" + prefix + key + "' has the wrong type");
    }
  }

  void reject_unknown(const json& obj, const std::set<std::string>& allowed, const std::string& prefix) {
    for (const auto& [k, _] : obj.items())
      if (!allowed.count(k)) add("unknown key '" + prefix + k + "'");
  }

  const std::vector<std::string>& errors() const { return errors_; }

 private:
  std::vector<std::string> errors_;
};

const std::set<std::string> kTopKeys = {
    "epochs",  "batch_size", "seq_len",      "hidden",        "lr0",
    "lr_decay_gamma", "dropout_p", "grad_clip", "forget_bias", "dense_decoder_input",
    "seed",    "val_subjects", "val_fraction", "checkpoint_every_epochs", "max_steps",
    "resume_from", "skeleton", "data",        "val_data",      "out",
    "loss",    "ablation"};
const std::set<std::string> kLossKeys = {"alpha", "beta", "eta", "rho", "tau"};
const std::set<std::string> kAblationKeys = {"residual", "layer_norm", "recurrent_dropout", "smoothness"};

void collect_constraints(const TrainConfig& c, Collector& col) {
  col.check(c.epochs >= 1, "'epochs' must be >= 1");
  col.check(c.batch_size >= 1, "'batch_size' must be >= 1");
  col.check(c.seq_len >= 1, "'seq_len' must be >= 1");
  col.check(c.hidden >= 2, "'hidden' must be >= 2");
  col.check(std::isfinite(c.lr0) && c.lr0 >= 0.0, "'lr0' must be >= 0");
  col.check(c.lr_decay_gamma > 0.0 && c.lr_decay_gamma <= 1.0, "'lr_decay_gamma' must be in (0, 1]");
  col.check(c.dropout_p >= 0.0 && c.dropout_p < 1.0, "'dropout_p' must be in [0, 1)");
  col.check(std::isfinite(c.grad_clip) && c.grad_clip >= 0.0, "'grad_clip' must be >= 0");
  col.check(std::isfinite(c.forget_bias), "'forget_bias' must be finite");
  col.check(c.val_fraction >= 0.0 && c.val_fraction < 1.0, "'val_fraction' must be in [0, 1)");
  col.check(c.checkpoint_every_epochs >= 1, "'checkpoint_every_epochs' must be >= 1");
  for (auto [name, v] : {std::pair{"alpha", c.loss.alpha}, {"beta", c.loss.beta}, {"eta", c.loss.eta},
                         {"rho", c.loss.rho}, {"tau", c.loss.tau}})
    col.check(std::isfinite(v) && v >= 0.0, std::string("'loss.") + name + "' must be >= 0");
  col.check(c.seq_len >= 2 || c.effective_loss().beta == 0.0,
            "seq_len 1 leaves no frame differences; set loss.beta to 0 or disable ablation.smoothness");
}

}  // namespace

loss::LossWeights TrainConfig::effective_loss() const {
  loss::LossWeights w = loss;
  if (!ablation.smoothness) w.beta = 0.0;
  return w;
}

model::ModelConfig TrainConfig::model_config(std::size_t input_dim, std::size_t output_dim) const {
  model::ModelConfig m;
  m.input_dim = input_dim;
  m.output_dim = output_dim;
  m.hidden = hidden;
  m.seq_len = seq_len;
  m.dropout_p = ablation.recurrent_dropout ? dropout_p : 0.0;
  m.forget_bias = forget_bias;
  m.residual = ablation.residual;
  m.layer_norm = ablation.layer_norm;
  m.dense_decoder_input = dense_decoder_input;
  return m;
}

void TrainConfig::validate() const {
  Collector col;
  collect_constraints(*this, col);
  col.throw_if_any();
}

json TrainConfig::identity_json() const {
  return {{"epochs", epochs},
          {"batch_size", batch_size},
          {"seq_len", seq_len},
          {"hidden", hidden},
          {"lr0", lr0},
          {"lr_decay_gamma", lr_decay_gamma},
          {"dropout_p", dropout_p},
          {"grad_clip", grad_clip},
          {"forget_bias", forget_bias},
          {"dense_decoder_input", dense_decoder_input},
          {"seed", seed},
          {"val_subjects", val_subjects},
          {"val_fraction", val_fraction},
          {"loss", loss.to_json()},
          {"ablation",
           {{"residual", ablation.residual},
            {"layer_norm", ablation.layer_norm},
            {"recurrent_dropout", ablation.recurrent_dropout},
            {"smoothness", ablation.smoothness}}}};
}

json TrainConfig::to_json() const {
  json j = identity_json();
  j["checkpoint_every_epochs"] = checkpoint_every_epochs;
  j["max_steps"] = max_steps;
  j["resume_from"] = resume_from;
  return j;
}

json RunConfig::to_json() const {
  json j = train.to_json();
  j["skeleton"] = skeleton;
  j["data"] = data;
  j["val_data"] = val_data;
  j["out"] = out;
  return j;
}

RunConfig resolve_run_config(const json& file, const json& overrides, bool check_paths) {
  Collector col;
  json merged = file.is_null() ? json::object() : file;
  if (!merged.is_object()) fail(ErrorCode::kConfig, "invalid configuration: top level must be a JSON object");
  if (!overrides.is_null()) {
    if (!overrides.is_object()) fail(ErrorCode::kConfig, "invalid configuration: overrides must be an object");
    merged.merge_patch(overrides);
  }
  col.reject_unknown(merged, kTopKeys, "");

  RunConfig rc;
  TrainConfig& c = rc.train;
  col.read(merged, "epochs", c.epochs);
  col.read(merged, "batch_size", c.batch_size);
  col.read(merged, "seq_len", c.seq_len);
  col.read(merged, "hidden", c.hidden);
  col.read(merged, "lr0", c.lr0);
  col.read(merged, "lr_decay_gamma", c.lr_decay_gamma);
  col.read(merged, "dropout_p", c.dropout_p);
  col.read(merged, "grad_clip", c.grad_clip);
  col.read(merged, "forget_bias", c.forget_bias);
  col.read(merged, "dense_decoder_input", c.dense_decoder_input);
  col.read(merged, "seed", c.seed);
  col.read(merged, "val_fraction", c.val_fraction);
  col.read(merged, "checkpoint_every_epochs", c.checkpoint_every_epochs);
  col.read(merged, "max_steps", c.max_steps);
  col.read(merged, "resume_from", c.resume_from);
  col.read(merged, "skeleton", rc.skeleton);
  col.read(merged, "data", rc.data);
  col.read(merged, "val_data", rc.val_data);
  col.read(merged, "out", rc.out);
  if (merged.contains("val_subjects")) {
    const json& v = merged.at("val_subjects");
    if (v.is_array() && std::all_of(v.begin(), v.end(), [](const json& e) { return e.is_string(); }))
      c.val_subjects = v.get<std::vector<std::string>>();
    else
      col.add("'val_subjects' must be an array of strings");
  }
  if (merged.contains("loss")) {
    const json& l = merged.at("loss");
    if (!l.is_object()) {
      col.add("'loss' must be an object");
    } else {
      col.reject_unknown(l, kLossKeys, "loss.");
      col.read(l, "alpha", c.loss.alpha, "loss.");
      col.read(l, "beta", c.loss.beta, "loss.");
      col.read(l, "eta", c.loss.eta, "loss.");
      col.read(l, "rho", c.loss.rho, "loss.");
      col.read(l, "tau", c.loss.tau, "loss.");
    }
  }
  if (merged.contains("ablation")) {
    const json& a = merged.at("ablation");
    if (!a.is_object()) {
      col.add("'ablation' must be an object");
    } else {
      col.reject_unknown(a, kAblationKeys, "ablation.");
      col.read(a, "residual", c.ablation.residual, "ablation.");
      col.read(a, "layer_norm", c.ablation.layer_norm, "ablation.");
      col.read(a, "recurrent_dropout", c.ablation.recurrent_dropout, "ablation.");
      col.read(a, "smoothness", c.ablation.smoothness, "ablation.");
    }
  }
  collect_constraints(c, col);
  if (check_paths) {
    namespace fs = std::filesystem;
    for (auto [key, path] : {std::pair<const char*, const std::string*>{"skeleton", &rc.skeleton},
                             {"data", &rc.data},
                             {"val_data", &rc.val_data},
                             {"resume_from", &c.resume_from}})
      if (!path->empty() && !fs::exists(*path)) col.add(std::string("'") + key + "' path does not exist: " + *path);
  }
  col.throw_if_any();
  return rc;
}

double lr_at(std::uint64_t iteration, const TrainConfig& cfg) {
  return cfg.lr0 * std::pow(cfg.lr_decay_gamma, static_cast<double>(iteration));
}

}  // namespace poselift::trainer
