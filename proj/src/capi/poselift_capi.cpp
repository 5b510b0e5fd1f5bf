#include "poselift/poselift.h"

#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <new>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "common/error.hpp"
#include "common/log.hpp"
#include "evaluator/evaluate.hpp"
#include "evaluator/filters.hpp"
#include "evaluator/inference.hpp"
#include "evaluator/metrics.hpp"
#include "model/checkpoint.hpp"
#include "pipeline/noise.hpp"
#include "pipeline/pose_data.hpp"
#include "pipeline/synth.hpp"
#include "trainer/train_config.hpp"
#include "trainer/trainer.hpp"

using namespace poselift;
using nlohmann::json;

struct pl_skeleton {
  skeleton::SkeletonSpec spec;
};

struct pl_dataset {
  skeleton::SkeletonSpec spec;
  std::vector<pipeline::PoseSequence> sequences;
};

struct pl_model {
  evaluator::Lifter lifter;
  json train_state;
};

struct pl_report {
  evaluator::EvalReport report;
};

namespace {

thread_local std::string g_last_error;

pl_status status_of(ErrorCode c) {
  switch (c) {
    case ErrorCode::kInvalidArgument: return PL_ERR_INVALID_ARGUMENT;
    case ErrorCode::kShapeMismatch: return PL_ERR_SHAPE;
    case ErrorCode::kIo: return PL_ERR_IO;
    case ErrorCode::kFormat: return PL_ERR_FORMAT;
    case ErrorCode::kNumeric: return PL_ERR_NUMERIC;
    case ErrorCode::kConfig: return PL_ERR_CONFIG;
  }
  return PL_ERR_INTERNAL;
}

template <class F>
pl_status guarded(F&& fn) {
  try {
    fn();
    g_last_error.clear();
    return PL_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return status_of(e.code());
  } catch (const json::exception& e) {
    g_last_error = std::string("json: ") + e.what();
    return PL_ERR_FORMAT;
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
    return PL_ERR_INTERNAL;
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return PL_ERR_INTERNAL;
  } catch (...) {
    g_last_error = "unknown failure";
    return PL_ERR_INTERNAL;
  }
}

void need(const void* p, const char* what) {
  require(p != nullptr, ErrorCode::kInvalidArgument, std::string(what) + " must not be null");
}

char* dup_string(const std::string& s) {
  char* out = static_cast<char*>(std::malloc(s.size() + 1));
  if (!out) throw std::bad_alloc();
  std::memcpy(out, s.c_str(), s.size() + 1);
  return out;
}

json read_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorCode::kIo, "cannot open '" + path + "'");
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfig, "invalid configuration: '" + path + "' is not valid JSON: " + e.what());
  }
}

json parse_overrides(const char* overrides) {
  if (overrides == nullptr || *overrides == '\0') return json();
  try {
    return json::parse(overrides);
  } catch (const json::parse_error& e) {
    fail(ErrorCode::kConfig, std::string("invalid configuration: overrides are not valid JSON: ") + e.what());
  }
}

trainer::RunConfig resolve(const char* config_path, const char* overrides) {
  const json file = config_path && *config_path ? read_json_file(config_path) : json();
  return trainer::resolve_run_config(file, parse_overrides(overrides), true);
}

skeleton::SkeletonSpec skeleton_for(const trainer::RunConfig& rc) {
  return rc.skeleton.empty() ? skeleton::SkeletonSpec::h36m17() : skeleton::SkeletonSpec::load(rc.skeleton);
}

trainer::TrainData load_train_data(const trainer::RunConfig& rc, const skeleton::SkeletonSpec& spec) {
  require(!rc.data.empty(), ErrorCode::kConfig, "invalid configuration: data: a training data path is required");
  auto all = pipeline::ingest(rc.data, spec);
  if (!rc.val_data.empty()) return {std::move(all), pipeline::ingest(rc.val_data, spec)};
  return trainer::split_for_validation(all, rc.train);
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  return buf;
}

struct Scored {
  std::size_t steps = 0;
  std::size_t val_sequences = 0;
  double p1 = 0.0, p2 = 0.0, jitter = 0.0;
};

// Trains into `out` and scores the final model on the validation split.
Scored train_and_score(const trainer::TrainConfig& cfg, const trainer::TrainData& data,
                       const skeleton::SkeletonSpec& spec, const std::string& out) {
  const auto res = trainer::train(cfg, data, spec, out);
  Scored s;
  s.steps = res.last_step;
  std::vector<pipeline::PoseSequence> val;
  for (const auto& q : data.val)
    if (q.has_3d() && q.length() >= cfg.seq_len) val.push_back(q);
  s.val_sequences = val.size();
  require(!val.empty(), ErrorCode::kInvalidArgument, "no validation sequences to score");
  const auto lifter = evaluator::Lifter::from_checkpoint(*res.checkpoint);
  s.p1 = evaluator::evaluate(lifter, val, 1).overall_frames;
  s.p2 = evaluator::evaluate(lifter, val, 2).overall_frames;
  const auto lifted = evaluator::lift_all(lifter, pipeline::prepare_all(val, spec));
  double jit = 0.0;
  for (const auto& m : lifted) jit += evaluator::temporal_jitter(m);
  s.jitter = jit / static_cast<double>(lifted.size());
  return s;
}

std::string run_dir(const std::string& out, const std::string& leaf) {
  return out.empty() ? std::string() : (std::filesystem::path(out) / leaf).string();
}

}  // namespace

extern "C" {

const char* pl_last_error(void) { return g_last_error.c_str(); }

const char* pl_status_string(pl_status status) {
  switch (status) {
    case PL_OK: return "ok";
    case PL_ERR_INVALID_ARGUMENT: return "invalid_argument";
    case PL_ERR_SHAPE: return "shape_mismatch";
    case PL_ERR_IO: return "io_error";
    case PL_ERR_FORMAT: return "format_error";
    case PL_ERR_NUMERIC: return "numeric_error";
    case PL_ERR_CONFIG: return "config_error";
    case PL_ERR_INTERNAL: return "internal_error";
  }
  return "unknown";
}

const char* pl_version(void) { return "1.0.0"; }

void pl_string_free(char* s) { std::free(s); }

void pl_set_log_level(int level) {
  if (level < 0) level = 0;
  if (level > 3) level = 3;
  set_log_level(static_cast<LogLevel>(level));
}

pl_status pl_skeleton_load(const char* path, pl_skeleton** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto spec = path ? skeleton::SkeletonSpec::load(path) : skeleton::SkeletonSpec::h36m17();
    *out = new pl_skeleton{std::move(spec)};
  });
}

size_t pl_skeleton_joint_count(const pl_skeleton* s) { return s ? s->spec.n_joints() : 0; }

void pl_skeleton_free(pl_skeleton* s) { delete s; }

pl_status pl_dataset_load(const char* path, const pl_skeleton* sk, pl_dataset** out) {
  return guarded([&] {
    need(path, "path");
    need(out, "out");
    *out = nullptr;
    auto spec = sk ? sk->spec : skeleton::SkeletonSpec::h36m17();
    auto seqs = pipeline::ingest(path, spec);
    *out = new pl_dataset{std::move(spec), std::move(seqs)};
  });
}

pl_status pl_dataset_synth(size_t sequences, size_t length, uint64_t seed, pl_dataset** out) {
  return guarded([&] {
    need(out, "out");
    *out = nullptr;
    auto seqs = pipeline::synth_generate(sequences, length, pipeline::CameraExtrinsics::synthetic_default(), seed);
    *out = new pl_dataset{skeleton::SkeletonSpec::h36m17(), std::move(seqs)};
  });
}

pl_status pl_dataset_save(const pl_dataset* data, const char* path) {
  return guarded([&] {
    need(data, "data");
    need(path, "path");
    pipeline::write_pose_file(path, data->sequences);
  });
}

pl_status pl_dataset_summary(const pl_dataset* data, char** json_out) {
  return guarded([&] {
    need(data, "data");
    need(json_out, "json_out");
    std::size_t frames = 0, with3d = 0;
    std::set<std::string> subjects;
    std::map<std::string, std::size_t> actions;
    for (const auto& s : data->sequences) {
      frames += s.length();
      with3d += s.has_3d() ? 1 : 0;
      subjects.insert(s.subject);
      actions[s.action] += 1;
    }
    const json j = {{"sequences", data->sequences.size()},
                    {"frames", frames},
                    {"with_3d", with3d},
                    {"joints", data->spec.n_joints()},
                    {"subjects", subjects},
                    {"actions", actions}};
    *json_out = dup_string(j.dump());
  });
}

size_t pl_dataset_count(const pl_dataset* data) { return data ? data->sequences.size() : 0; }

pl_status pl_dataset_add_noise(pl_dataset* data, double sigma, uint64_t seed) {
  return guarded([&] {
    need(data, "data");
    data->sequences = pipeline::add_gaussian_noise(data->sequences, sigma, seed);
  });
}

void pl_dataset_free(pl_dataset* data) { delete data; }

pl_status pl_config_resolve(const char* config_path, const char* overrides_json, char** json_out) {
  return guarded([&] {
    need(json_out, "json_out");
    *json_out = dup_string(resolve(config_path, overrides_json).to_json().dump(2));
  });
}

pl_status pl_train(const char* config_path, const char* overrides_json, char** summary_out) {
  return guarded([&] {
    const auto rc = resolve(config_path, overrides_json);
    const auto spec = skeleton_for(rc);
    const auto data = load_train_data(rc, spec);
    const auto res = trainer::train(rc.train, data, spec, rc.out);
    json j = {{"checkpoint", res.final_checkpoint},
              {"first_step", res.first_step},
              {"steps", res.last_step},
              {"windows", res.n_windows},
              {"train_sequences", data.train.size()},
              {"val_sequences", data.val.size()}};
    if (!res.step_losses.empty()) j["first_loss"] = res.step_losses.front();
    if (!res.epoch_mean_losses.empty()) j["final_epoch_loss"] = res.epoch_mean_losses.back();
    if (!res.val_mpjpe.empty()) j["val_mpjpe_mm"] = res.val_mpjpe.back();
    if (summary_out) *summary_out = dup_string(j.dump());
  });
}

pl_status pl_sweep_seq_len(const char* config_path, const char* overrides_json, const uint32_t* seq_lens,
                           size_t count, char** csv_out) {
  return guarded([&] {
    need(seq_lens, "seq_lens");
    need(csv_out, "csv_out");
    require(count > 0, ErrorCode::kInvalidArgument, "sweep: no values");
    const auto rc = resolve(config_path, overrides_json);
    const auto spec = skeleton_for(rc);
    const auto data = load_train_data(rc, spec);
    // Validate every point before training any of them.
    std::vector<trainer::TrainConfig> cfgs;
    for (size_t i = 0; i < count; ++i) {
      trainer::TrainConfig c = rc.train;
      c.seq_len = seq_lens[i];
      c.resume_from.clear();
      c.validate();
      cfgs.push_back(c);
    }
    std::string csv = "seq_len,steps,val_sequences,protocol1_mm,protocol2_mm\n";
    for (const auto& c : cfgs) {
      const auto s = train_and_score(c, data, spec, run_dir(rc.out, "seq_len_" + std::to_string(c.seq_len)));
      csv += std::to_string(c.seq_len) + ',' + std::to_string(s.steps) + ',' + std::to_string(s.val_sequences) +
             ',' + fmt(s.p1) + ',' + fmt(s.p2) + '\n';
    }
    *csv_out = dup_string(csv);
  });
}

pl_status pl_ablate(const char* config_path, const char* overrides_json, const char* const* toggles, size_t count,
                    char** csv_out) {
  return guarded([&] {
    need(csv_out, "csv_out");
    require(count == 0 || toggles != nullptr, ErrorCode::kInvalidArgument, "toggles must not be null");
    const auto rc = resolve(config_path, overrides_json);
    std::vector<std::pair<std::string, trainer::AblationToggles>> variants{{"full", rc.train.ablation}};
    for (size_t i = 0; i < count; ++i) {
      need(toggles[i], "toggle");
      const std::string name = toggles[i];
      trainer::AblationToggles t = rc.train.ablation;
      if (name == "residual") t.residual = false;
      else if (name == "layer_norm") t.layer_norm = false;
      else if (name == "recurrent_dropout") t.recurrent_dropout = false;
      else if (name == "smoothness") t.smoothness = false;
      else
        fail(ErrorCode::kInvalidArgument, "unknown ablation toggle '" + name +
                                              "' (expected residual, layer_norm, recurrent_dropout or smoothness)");
      variants.emplace_back("no_" + name, t);
    }
    for (const auto& v : variants) {
      trainer::TrainConfig c = rc.train;
      c.ablation = v.second;
      c.validate();
    }
    const auto spec = skeleton_for(rc);
    const auto data = load_train_data(rc, spec);
    std::string csv = "variant,steps,val_sequences,protocol1_mm,protocol2_mm,jitter_mm\n";
    for (const auto& v : variants) {
      trainer::TrainConfig c = rc.train;
      c.resume_from.clear();
      c.ablation = v.second;
      const auto s = train_and_score(c, data, spec, run_dir(rc.out, v.first));
      csv += v.first + ',' + std::to_string(s.steps) + ',' + std::to_string(s.val_sequences) + ',' + fmt(s.p1) +
             ',' + fmt(s.p2) + ',' + fmt(s.jitter) + '\n';
    }
    *csv_out = dup_string(csv);
  });
}

pl_status pl_model_load(const char* checkpoint_path, pl_model** out) {
  return guarded([&] {
    need(checkpoint_path, "checkpoint_path");
    need(out, "out");
    *out = nullptr;
    auto ck = model::load_checkpoint(checkpoint_path);
    auto state = ck.train_state;
    *out = new pl_model{evaluator::Lifter::from_checkpoint(ck), std::move(state)};
  });
}

pl_status pl_model_info(const pl_model* m, char** json_out) {
  return guarded([&] {
    need(m, "model");
    need(json_out, "json_out");
    json j = m->lifter.params.config.to_json();
    j["joints"] = m->lifter.skeleton.n_joints();
    j["parameters"] = m->lifter.params.parameter_count();
    j["fingerprint"] = evaluator::fingerprint_of(m->lifter);
    j["train_state"] = m->train_state;
    *json_out = dup_string(j.dump());
  });
}

void pl_model_free(pl_model* m) { delete m; }

pl_status pl_lift(const pl_model* m, const pl_dataset* in, pl_dataset** out) {
  return guarded([&] {
    need(m, "model");
    need(in, "input");
    need(out, "out");
    *out = nullptr;
    const auto& spec = m->lifter.skeleton;
    require(in->spec.n_joints() == spec.n_joints(), ErrorCode::kShapeMismatch,
            "lift: data has " + std::to_string(in->spec.n_joints()) + " joints, model expects " +
                std::to_string(spec.n_joints()));
    const auto lifted = evaluator::lift_all(m->lifter, pipeline::prepare_all(in->sequences, spec));
    auto res = std::make_unique<pl_dataset>(pl_dataset{spec, {}});
    for (std::size_t i = 0; i < lifted.size(); ++i)
      res->sequences.push_back(evaluator::to_pose_sequence(in->sequences[i], lifted[i], spec));
    *out = res.release();
  });
}

pl_status pl_lift_frames(const pl_model* m, const double* frames_2d, size_t frames, double* frames_3d_out) {
  return guarded([&] {
    need(m, "model");
    need(frames_2d, "frames_2d");
    need(frames_3d_out, "frames_3d_out");
    const auto& spec = m->lifter.skeleton;
    const std::size_t J = spec.n_joints();
    pipeline::PoseSequence seq;
    seq.frames_2d = kernel::Matrix(frames, J * 2);
    std::copy(frames_2d, frames_2d + frames * J * 2, seq.frames_2d.data());
    const auto prepared = pipeline::prepare(seq, spec);
    const auto lifted = evaluator::sliding_infer(m->lifter, prepared.inputs_2d);
    const auto full = evaluator::to_pose_sequence(seq, lifted, spec);
    std::copy(full.frames_3d.values().begin(), full.frames_3d.values().end(), frames_3d_out);
  });
}

pl_status pl_eval_model(const pl_model* m, const pl_dataset* data, int protocol, pl_report** out) {
  return guarded([&] {
    need(m, "model");
    need(data, "data");
    need(out, "out");
    *out = nullptr;
    require(data->spec.n_joints() == m->lifter.skeleton.n_joints(), ErrorCode::kShapeMismatch,
            "eval: data has " + std::to_string(data->spec.n_joints()) + " joints, model expects " +
                std::to_string(m->lifter.skeleton.n_joints()));
    *out = new pl_report{evaluator::evaluate(m->lifter, data->sequences, protocol)};
  });
}

pl_status pl_eval_predictions(const pl_dataset* pred, const pl_dataset* gt, const pl_skeleton* sk, int protocol,
                              pl_report** out) {
  return guarded([&] {
    need(pred, "pred");
    need(gt, "gt");
    need(out, "out");
    *out = nullptr;
    const auto spec = sk ? sk->spec : gt->spec;
    std::vector<kernel::Matrix> preds;
    for (std::size_t i = 0; i < pred->sequences.size(); ++i) {
      const auto& s = pred->sequences[i];
      require(s.has_3d(), ErrorCode::kInvalidArgument, "eval: prediction " + std::to_string(i) + " has no 3D");
      preds.push_back(pipeline::prepare(s, spec).targets_3d);
    }
    *out = new pl_report{evaluator::evaluate_predictions(preds, pipeline::prepare_all(gt->sequences, spec), protocol,
                                                         "predictions")};
  });
}

pl_status pl_filter(const pl_dataset* pred, const pl_skeleton* sk, const char* kind, size_t window, pl_dataset** out) {
  return guarded([&] {
    need(pred, "pred");
    need(kind, "kind");
    need(out, "out");
    *out = nullptr;
    const auto k = evaluator::parse_filter_kind(kind);
    const auto spec = sk ? sk->spec : pred->spec;
    auto res = std::make_unique<pl_dataset>(pl_dataset{spec, {}});
    for (std::size_t i = 0; i < pred->sequences.size(); ++i) {
      pipeline::PoseSequence s = pred->sequences[i];
      require(s.has_3d(), ErrorCode::kInvalidArgument, "baseline: sequence " + std::to_string(i) + " has no 3D");
      s.frames_3d = evaluator::filter_baseline(pipeline::camera_frame_3d(s), k, window);
      s.extrinsics.reset();
      res->sequences.push_back(std::move(s));
    }
    *out = res.release();
  });
}

pl_status pl_noise_sweep(const pl_model* m, const pl_dataset* data, const double* sigmas, size_t count, uint64_t seed,
                         char** csv_out) {
  return guarded([&] {
    need(m, "model");
    need(data, "data");
    need(sigmas, "sigmas");
    need(csv_out, "csv_out");
    require(count > 0, ErrorCode::kInvalidArgument, "sweep: no values");
    const auto rows =
        evaluator::noise_sweep(m->lifter, data->sequences, std::vector<double>(sigmas, sigmas + count), seed);
    std::string csv = "sigma,frames,error_mm,avg_actions_mm\n";
    for (const auto& r : rows) {
      char buf[160];
      std::snprintf(buf, sizeof buf, "%g,%zu,%.6f,%.6f\n", r.sigma, r.report.n_frames, r.report.overall_frames,
                    r.report.overall_actions);
      csv += buf;
    }
    *csv_out = dup_string(csv);
  });
}

pl_status pl_report_csv(const pl_report* r, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = dup_string(r->report.to_csv());
  });
}

pl_status pl_report_json(const pl_report* r, int with_frames, char** out) {
  return guarded([&] {
    need(r, "report");
    need(out, "out");
    *out = dup_string(r->report.to_json(with_frames != 0).dump(2));
  });
}

double pl_report_error(const pl_report* r, int which) {
  if (!r) return -1.0;
  return which == 1 ? r->report.overall_actions : r->report.overall_frames;
}

void pl_report_free(pl_report* r) { delete r; }

pl_status pl_write_text(const char* path, const char* content) {
  return guarded([&] {
    need(path, "path");
    need(content, "content");
    evaluator::write_text_file(path, content);
  });
}

}  // extern "C"
