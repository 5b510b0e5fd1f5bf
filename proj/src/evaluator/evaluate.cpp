#include "evaluator/evaluate.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "common/error.hpp"
#include "evaluator/metrics.hpp"
#include "evaluator/procrustes.hpp"
#include "pipeline/noise.hpp"

namespace poselift::evaluator {

using nlohmann::json;

json EvalReport::to_json(bool with_frames) const {
  json actions = json::object();
  for (const auto& [name, a] : per_action) actions[name] = {{"frames", a.frames}, {"error_mm", a.error_mm}};
  json j = {{"protocol", protocol},
            {"per_action", actions},
            {"overall_frame_weighted_mm", overall_frames},
            {"overall_action_mean_mm", overall_actions},
            {"n_frames", n_frames},
            {"fingerprint", fingerprint}};
  if (with_frames) j["frame_errors"] = frame_errors;
  return j;
}

std::string EvalReport::to_csv() const {
  std::ostringstream out;
  out << "action,protocol,frames,error_mm\n";
  char buf[64];
  auto row = [&](const std::string& name, std::size_t frames, double err) {
    std::snprintf(buf, sizeof buf, "%.6f", err);
    out << name << ',' << protocol << ',' << frames << ',' << buf << '\n';
  };
  for (const auto& [name, a] : per_action) row(name, a.frames, a.error_mm);
  row("ALL_FRAMES", n_frames, overall_frames);
  row("AVG_ACTIONS", n_frames, overall_actions);
  return out.str();
}

double frame_error(std::span<const double> pred, std::span<const double> gt, int protocol) {
  if (protocol == 1) return mpjpe(pred, gt);
  require(protocol == 2, ErrorCode::kInvalidArgument, "protocol must be 1 or 2");
  const Alignment a = procrustes_align(pred, gt);
  // The identity is itself a similarity transform; guards against the
  // closed form losing to it by rounding (e.g. pred == gt).
  return std::min(mpjpe(a.aligned, gt), mpjpe(pred, gt));
}

EvalReport evaluate_predictions(const std::vector<kernel::Matrix>& predictions,
                                const std::vector<pipeline::PreparedSequence>& gt, int protocol,
                                const std::string& fingerprint) {
  require(protocol == 1 || protocol == 2, ErrorCode::kInvalidArgument, "protocol must be 1 or 2");
  require(predictions.size() == gt.size(), ErrorCode::kShapeMismatch,
          "evaluate: " + std::to_string(predictions.size()) + " predicted sequences vs " +
              std::to_string(gt.size()) + " ground-truth sequences");
  require(!gt.empty(), ErrorCode::kInvalidArgument, "evaluate: empty dataset");
  EvalReport r;
  r.protocol = protocol;
  r.fingerprint = fingerprint;
  std::map<std::string, double> sums;
  double total = 0.0;
  for (std::size_t i = 0; i < gt.size(); ++i) {
    const auto& g = gt[i].targets_3d;
    const auto& p = predictions[i];
    require(!g.empty(), ErrorCode::kInvalidArgument, "evaluate: sequence " + std::to_string(i) + " has no 3D ground truth");
    require(p.rows() == g.rows() && p.cols() == g.cols(), ErrorCode::kShapeMismatch,
            "evaluate: sequence " + std::to_string(i) + " prediction shape does not match ground truth");
    for (std::size_t f = 0; f < g.rows(); ++f) {
      const double e = frame_error(p.row(f), g.row(f), protocol);
      r.frame_errors.push_back(e);
      sums[gt[i].action] += e;
      r.per_action[gt[i].action].frames += 1;
      total += e;
    }
  }
  r.n_frames = r.frame_errors.size();
  require(r.n_frames > 0, ErrorCode::kInvalidArgument, "evaluate: no frames");
  r.overall_frames = total / static_cast<double>(r.n_frames);
  double action_sum = 0.0;
  for (auto& [name, a] : r.per_action) {
    a.error_mm = sums[name] / static_cast<double>(a.frames);
    action_sum += a.error_mm;
  }
  r.overall_actions = action_sum / static_cast<double>(r.per_action.size());
  return r;
}

std::string fingerprint_of(const Lifter& lifter) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto feed = [&](const void* p, std::size_t n) {
    const auto* b = static_cast<const unsigned char*>(p);
    for (std::size_t i = 0; i < n; ++i) {
      h ^= b[i];
      h *= 0x100000001b3ULL;
    }
  };
  const std::string cfg = lifter.params.config.to_json().dump();
  feed(cfg.data(), cfg.size());
  lifter.params.visit([&](const std::string&, std::span<const double> v) { feed(v.data(), v.size() * sizeof(double)); });
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

EvalReport evaluate(const Lifter& lifter, const std::vector<pipeline::PoseSequence>& data, int protocol) {
  require(!data.empty(), ErrorCode::kInvalidArgument, "evaluate: empty dataset");
  require(data.front().frames_2d.cols() == lifter.skeleton.n_joints() * 2, ErrorCode::kShapeMismatch,
          "evaluate: dataset skeleton does not match the checkpoint skeleton");
  const auto prepared = pipeline::prepare_all(data, lifter.skeleton);
  const auto preds = lift_all(lifter, prepared);
  return evaluate_predictions(preds, prepared, protocol, fingerprint_of(lifter));
}

std::vector<NoiseSweepRow> noise_sweep(const Lifter& lifter, const std::vector<pipeline::PoseSequence>& data,
                                       const std::vector<double>& sigmas, std::uint64_t seed) {
  std::vector<NoiseSweepRow> rows;
  for (double sigma : sigmas) {
    const auto noisy = pipeline::add_gaussian_noise(data, sigma, seed);
    rows.push_back({sigma, evaluate(lifter, noisy, 2)});
  }
  return rows;
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write '" + path + "'");
  out << content;
  require(out.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

}  // namespace poselift::evaluator
