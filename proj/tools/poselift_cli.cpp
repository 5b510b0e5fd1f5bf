// Command-line front end over the poselift C API.
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "poselift/poselift.h"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CliFailure {
  std::string code;
  std::string message;
};

void check(pl_status s) {
  if (s != PL_OK) throw CliFailure{pl_status_string(s), pl_last_error()};
}

[[noreturn]] void usage_error(const std::string& msg) { throw CliFailure{"usage_error", msg}; }

std::string take(char* s) {
  std::string out = s ? s : "";
  pl_string_free(s);
  return out;
}

template <class T, void (*Free)(T*)>
struct Deleter {
  void operator()(T* p) const { Free(p); }
};
using Dataset = std::unique_ptr<pl_dataset, Deleter<pl_dataset, pl_dataset_free>>;
using Model = std::unique_ptr<pl_model, Deleter<pl_model, pl_model_free>>;
using Report = std::unique_ptr<pl_report, Deleter<pl_report, pl_report_free>>;
using Skeleton = std::unique_ptr<pl_skeleton, Deleter<pl_skeleton, pl_skeleton_free>>;

Skeleton load_skeleton(const std::string& path) {
  pl_skeleton* s = nullptr;
  check(pl_skeleton_load(path.empty() ? nullptr : path.c_str(), &s));
  return Skeleton(s);
}

Dataset load_data(const std::string& path, const pl_skeleton* sk) {
  pl_dataset* d = nullptr;
  check(pl_dataset_load(path.c_str(), sk, &d));
  return Dataset(d);
}

Model load_model(const std::string& path) {
  pl_model* m = nullptr;
  check(pl_model_load(path.c_str(), &m));
  return Model(m);
}

void write_text(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  check(pl_write_text(path.string().c_str(), text.c_str()));
}

void ensure_dir(const std::string& out) {
  if (out.empty()) usage_error("--out is required");
  std::error_code ec;
  fs::create_directories(out, ec);
  if (ec) throw CliFailure{"io_error", "cannot create output directory '" + out + "': " + ec.message()};
}

void ensure_parent(const std::string& file) {
  const fs::path p(file);
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
}

// Accepts "a..b" (integer range, inclusive), comma lists, or repeated values.
std::vector<double> parse_values(const std::vector<std::string>& raw) {
  std::vector<double> out;
  for (const auto& item : raw) {
    std::stringstream ss(item);
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      if (tok.empty()) continue;
      const auto dots = tok.find("..");
      try {
        if (dots != std::string::npos) {
          std::size_t used_a = 0, used_b = 0;
          const std::string a = tok.substr(0, dots), b = tok.substr(dots + 2);
          const long lo = std::stol(a, &used_a), hi = std::stol(b, &used_b);
          if (used_a != a.size() || used_b != b.size() || hi < lo) throw std::invalid_argument(tok);
          for (long v = lo; v <= hi; ++v) out.push_back(static_cast<double>(v));
        } else {
          std::size_t used = 0;
          out.push_back(std::stod(tok, &used));
          if (used != tok.size()) throw std::invalid_argument(tok);
        }
      } catch (const std::logic_error&) {
        usage_error("--values: cannot parse '" + tok + "'");
      }
    }
  }
  if (out.empty()) usage_error("--values: no values given");
  return out;
}

// Training flags; only the ones given on the command line become overrides.
struct TrainFlags {
  std::string config, data, val_data, out, skeleton, resume;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> epochs, batch_size, seq_len, hidden, max_steps, checkpoint_every;
  std::optional<double> lr, lr_decay, dropout, grad_clip, forget_bias, alpha, beta, eta, rho, tau, val_fraction;
  std::vector<std::string> val_subjects;

  void add(CLI::App* app, bool with_seq_len = true) {
    app->add_option("--config", config, "JSON run configuration")->check(CLI::ExistingFile);
    app->add_option("--data", data, "training pose file");
    app->add_option("--val-data", val_data, "validation pose file");
    app->add_option("--out", out, "output directory");
    app->add_option("--skeleton", skeleton, "skeleton JSON (default: built-in 17 joints)");
    app->add_option("--seed", seed);
    app->add_option("--epochs", epochs);
    app->add_option("--batch-size", batch_size);
    if (with_seq_len) app->add_option("--seq-len", seq_len);
    app->add_option("--hidden", hidden);
    app->add_option("--lr", lr, "initial learning rate");
    app->add_option("--lr-decay", lr_decay, "per-iteration decay factor");
    app->add_option("--dropout", dropout);
    app->add_option("--grad-clip", grad_clip);
    app->add_option("--forget-bias", forget_bias);
    app->add_option("--alpha", alpha);
    app->add_option("--beta", beta);
    app->add_option("--eta", eta);
    app->add_option("--rho", rho);
    app->add_option("--tau", tau);
    app->add_option("--val-subjects", val_subjects)->delimiter(',');
    app->add_option("--val-fraction", val_fraction);
    app->add_option("--max-steps", max_steps);
    app->add_option("--checkpoint-every", checkpoint_every, "epochs between checkpoints");
    app->add_option("--resume", resume, "checkpoint to resume from");
  }

  json overrides() const {
    json j = json::object();
    auto put = [&](const char* key, const auto& v) {
      if (v) j[key] = *v;
    };
    auto put_loss = [&](const char* key, const std::optional<double>& v) {
      if (v) j["loss"][key] = *v;
    };
    if (!data.empty()) j["data"] = data;
    if (!val_data.empty()) j["val_data"] = val_data;
    if (!out.empty()) j["out"] = out;
    if (!skeleton.empty()) j["skeleton"] = skeleton;
    if (!resume.empty()) j["resume_from"] = resume;
    put("seed", seed);
    put("epochs", epochs);
    put("batch_size", batch_size);
    put("seq_len", seq_len);
    put("hidden", hidden);
    put("lr0", lr);
    put("lr_decay_gamma", lr_decay);
    put("dropout_p", dropout);
    put("grad_clip", grad_clip);
    put("forget_bias", forget_bias);
    put("val_fraction", val_fraction);
    put("max_steps", max_steps);
    put("checkpoint_every_epochs", checkpoint_every);
    put_loss("alpha", alpha);
    put_loss("beta", beta);
    put_loss("eta", eta);
    put_loss("rho", rho);
    put_loss("tau", tau);
    if (!val_subjects.empty()) j["val_subjects"] = val_subjects;
    return j;
  }

  // Output directory after config resolution (flag or file).
  std::string resolved_out() const {
    char* js = nullptr;
    check(pl_config_resolve(config.empty() ? nullptr : config.c_str(), overrides().dump().c_str(), &js));
    return json::parse(take(js)).value("out", std::string());
  }
};

void write_report(const pl_report* r, const std::string& out, const std::string& stem) {
  char* csv = nullptr;
  check(pl_report_csv(r, &csv));
  char* js = nullptr;
  check(pl_report_json(r, 0, &js));
  const std::string j = take(js);
  if (!out.empty()) {
    ensure_dir(out);
    write_text(fs::path(out) / (stem + ".csv"), take(csv));
    write_text(fs::path(out) / (stem + ".json"), j + "\n");
  } else {
    pl_string_free(csv);
  }
  std::cout << json::parse(j).dump() << "\n";
}

int run(int argc, char** argv) {
  CLI::App app{"poselift: 2D-to-3D pose sequence lifting"};
  app.require_subcommand(1);
  app.fallthrough();
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "progress logging on stderr");

  // synth
  auto* synth = app.add_subcommand("synth", "write a synthetic pose dataset");
  std::string synth_out;
  std::size_t synth_n = 100, synth_len = 100;
  std::uint64_t synth_seed = 0;
  synth->add_option("--out", synth_out, "pose file to write")->required();
  synth->add_option("--sequences", synth_n, "number of clips");
  synth->add_option("--length", synth_len, "frames per clip");
  synth->add_option("--seed", synth_seed);

  // ingest-check
  auto* ingest = app.add_subcommand("ingest-check", "validate a pose file and print counts");
  std::string ingest_data, ingest_skel;
  ingest->add_option("--data", ingest_data)->required();
  ingest->add_option("--skeleton", ingest_skel);

  // train
  auto* train = app.add_subcommand("train", "train a lifting model");
  TrainFlags train_flags;
  train_flags.add(train);

  // lift
  auto* lift = app.add_subcommand("lift", "lift 2D clips to 3D");
  std::string lift_ckpt, lift_in, lift_out, lift_skel;
  lift->add_option("--checkpoint", lift_ckpt)->required()->check(CLI::ExistingFile);
  lift->add_option("--in", lift_in)->required();
  lift->add_option("--out", lift_out, "pose file to write")->required();
  lift->add_option("--skeleton", lift_skel);

  // eval
  auto* eval = app.add_subcommand("eval", "score a model or a predictions file");
  std::string eval_ckpt, eval_pred, eval_data, eval_out, eval_skel;
  int eval_protocol = 1;
  auto* eval_ck_opt = eval->add_option("--checkpoint", eval_ckpt)->check(CLI::ExistingFile);
  eval->add_option("--pred", eval_pred, "lifted pose file")->excludes(eval_ck_opt);
  eval->add_option("--data", eval_data, "ground-truth pose file")->required();
  eval->add_option("--protocol", eval_protocol)->check(CLI::IsMember({1, 2}));
  eval->add_option("--out", eval_out, "report directory");
  eval->add_option("--skeleton", eval_skel);

  // baseline
  auto* baseline = app.add_subcommand("baseline", "temporal mean/median filter over predicted 3D");
  std::string base_pred, base_kind = "median", base_out, base_data, base_skel;
  std::size_t base_window = 5;
  int base_protocol = 1;
  baseline->add_option("--pred", base_pred, "pose file with 3D predictions")->required();
  baseline->add_option("--kind", base_kind)->check(CLI::IsMember({"mean", "median"}));
  baseline->add_option("--window", base_window);
  baseline->add_option("--out", base_out, "output directory")->required();
  baseline->add_option("--data", base_data, "ground truth; scores the filtered output when given");
  baseline->add_option("--protocol", base_protocol)->check(CLI::IsMember({1, 2}));
  baseline->add_option("--skeleton", base_skel);

  // sweep
  auto* sweep = app.add_subcommand("sweep", "window-length or noise sweep");
  std::string sweep_axis, sweep_ckpt;
  std::vector<std::string> sweep_values;
  std::uint64_t noise_seed = 0;
  TrainFlags sweep_flags;
  sweep->add_option("--axis", sweep_axis)->required()->check(CLI::IsMember({"seq_len", "sigma"}));
  sweep->add_option("--values", sweep_values, "e.g. 2..10 or 0,5,10")->required();
  sweep->add_option("--checkpoint", sweep_ckpt, "model for the sigma axis");
  sweep->add_option("--noise-seed", noise_seed);
  sweep_flags.add(sweep, false);

  // ablate
  auto* ablate = app.add_subcommand("ablate", "train the full model and variants with components disabled");
  std::vector<std::string> toggles;
  TrainFlags ablate_flags;
  ablate->add_option("--toggle", toggles, "residual|layer_norm|recurrent_dropout|smoothness")
      ->required()
      ->delimiter(',')
      ->check(CLI::IsMember({"residual", "layer_norm", "recurrent_dropout", "smoothness"}));
  ablate_flags.add(ablate);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    throw CliFailure{"usage_error", e.what()};
  }
  pl_set_log_level(verbose ? 1 : 2);

  if (*synth) {
    pl_dataset* d = nullptr;
    check(pl_dataset_synth(synth_n, synth_len, synth_seed, &d));
    Dataset data(d);
    ensure_parent(synth_out);
    check(pl_dataset_save(data.get(), synth_out.c_str()));
    char* js = nullptr;
    check(pl_dataset_summary(data.get(), &js));
    std::cout << take(js) << "\n";
  } else if (*ingest) {
    auto sk = load_skeleton(ingest_skel);
    auto data = load_data(ingest_data, sk.get());
    char* js = nullptr;
    check(pl_dataset_summary(data.get(), &js));
    std::cout << take(js) << "\n";
  } else if (*train) {
    char* js = nullptr;
    const auto cfg = train_flags.config;
    check(pl_train(cfg.empty() ? nullptr : cfg.c_str(), train_flags.overrides().dump().c_str(), &js));
    const std::string summary = take(js);
    const auto out = train_flags.resolved_out();
    if (!out.empty()) write_text(fs::path(out) / "summary.json", summary + "\n");
    std::cout << summary << "\n";
  } else if (*lift) {
    auto model = load_model(lift_ckpt);
    auto sk = load_skeleton(lift_skel);
    auto data = load_data(lift_in, sk.get());
    pl_dataset* o = nullptr;
    check(pl_lift(model.get(), data.get(), &o));
    Dataset lifted(o);
    ensure_parent(lift_out);
    check(pl_dataset_save(lifted.get(), lift_out.c_str()));
    std::cout << json{{"sequences", pl_dataset_count(lifted.get())}, {"out", lift_out}}.dump() << "\n";
  } else if (*eval) {
    if (eval_ckpt.empty() == eval_pred.empty()) usage_error("eval: give exactly one of --checkpoint or --pred");
    auto sk = load_skeleton(eval_skel);
    auto gt = load_data(eval_data, sk.get());
    pl_report* r = nullptr;
    if (!eval_ckpt.empty()) {
      auto model = load_model(eval_ckpt);
      check(pl_eval_model(model.get(), gt.get(), eval_protocol, &r));
    } else {
      auto pred = load_data(eval_pred, sk.get());
      check(pl_eval_predictions(pred.get(), gt.get(), sk.get(), eval_protocol, &r));
    }
    Report report(r);
    write_report(report.get(), eval_out, "eval_protocol" + std::to_string(eval_protocol));
  } else if (*baseline) {
    auto sk = load_skeleton(base_skel);
    auto pred = load_data(base_pred, sk.get());
    pl_dataset* f = nullptr;
    check(pl_filter(pred.get(), sk.get(), base_kind.c_str(), base_window, &f));
    Dataset filtered(f);
    ensure_dir(base_out);
    const auto path = (fs::path(base_out) / ("baseline_" + base_kind + ".jsonl")).string();
    check(pl_dataset_save(filtered.get(), path.c_str()));
    if (!base_data.empty()) {
      auto gt = load_data(base_data, sk.get());
      pl_report* r = nullptr;
      check(pl_eval_predictions(filtered.get(), gt.get(), sk.get(), base_protocol, &r));
      Report report(r);
      write_report(report.get(), base_out, "baseline_" + base_kind + "_protocol" + std::to_string(base_protocol));
    } else {
      std::cout << json{{"sequences", pl_dataset_count(filtered.get())}, {"out", path}}.dump() << "\n";
    }
  } else if (*sweep) {
    const auto values = parse_values(sweep_values);
    std::string csv;
    std::string out = sweep_flags.out;
    if (sweep_axis == "seq_len") {
      std::vector<std::uint32_t> lens;
      for (double v : values) {
        if (v < 1 || v != static_cast<double>(static_cast<std::uint32_t>(v)))
          usage_error("--values: window lengths must be positive integers");
        lens.push_back(static_cast<std::uint32_t>(v));
      }
      out = sweep_flags.resolved_out();
      char* c = nullptr;
      const auto& cfg = sweep_flags.config;
      check(pl_sweep_seq_len(cfg.empty() ? nullptr : cfg.c_str(), sweep_flags.overrides().dump().c_str(),
                             lens.data(), lens.size(), &c));
      csv = take(c);
    } else {
      if (sweep_ckpt.empty() || sweep_flags.data.empty()) usage_error("sweep --axis sigma needs --checkpoint and --data");
      auto model = load_model(sweep_ckpt);
      auto sk = load_skeleton(sweep_flags.skeleton);
      auto data = load_data(sweep_flags.data, sk.get());
      char* c = nullptr;
      check(pl_noise_sweep(model.get(), data.get(), values.data(), values.size(), noise_seed, &c));
      csv = take(c);
    }
    if (!out.empty()) write_text(fs::path(out) / ("sweep_" + sweep_axis + ".csv"), csv);
    std::cout << csv;
  } else if (*ablate) {
    std::vector<const char*> names;
    for (const auto& t : toggles) names.push_back(t.c_str());
    const auto out = ablate_flags.resolved_out();
    char* c = nullptr;
    const auto& cfg = ablate_flags.config;
    check(pl_ablate(cfg.empty() ? nullptr : cfg.c_str(), ablate_flags.overrides().dump().c_str(), names.data(),
                    names.size(), &c));
    const std::string csv = take(c);
    if (!out.empty()) write_text(fs::path(out) / "ablation.csv", csv);
    std::cout << csv;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const CliFailure& f) {
    std::cerr << json{{"error", f.code}, {"message", f.message}}.dump() << std::endl;
    return f.code == "usage_error" ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << json{{"error", "internal_error"}, {"message", e.what()}}.dump() << std::endl;
    return 1;
  }
}
