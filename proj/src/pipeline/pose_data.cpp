#include "pipeline/pose_data.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "common/error.hpp"

namespace poselift::pipeline {

using nlohmann::json;

namespace {

kernel::Matrix read_frames(const json& arr, std::size_t width, const std::string& where) {
  require(arr.is_array(), ErrorCode::kFormat, where + ": frames must be an array");
  kernel::Matrix m(arr.size(), width);
  for (std::size_t f = 0; f < arr.size(); ++f) {
    const auto& row = arr[f];
    require(row.is_array(), ErrorCode::kFormat, where + ": frame " + std::to_string(f) + " is not an array");
    require(row.size() == width, ErrorCode::kShapeMismatch,
            where + ": frame " + std::to_string(f) + " has " + std::to_string(row.size()) +
                " values, expected " + std::to_string(width));
    for (std::size_t k = 0; k < width; ++k) {
      require(row[k].is_number(), ErrorCode::kFormat,
              where + ": frame " + std::to_string(f) + " has a non-numeric value");
      const double v = row[k].get<double>();
      require(std::isfinite(v), ErrorCode::kNumeric,
              where + ": frame " + std::to_string(f) + " has a non-finite value");
      m(f, k) = v;
    }
  }
  return m;
}

json frames_json(const kernel::Matrix& m) {
  json arr = json::array();
  for (std::size_t f = 0; f < m.rows(); ++f) {
    auto r = m.row(f);
    arr.push_back(std::vector<double>(r.begin(), r.end()));
  }
  return arr;
}

}  // namespace

std::vector<PoseSequence> parse_pose_lines(std::istream& in, const skeleton::SkeletonSpec& spec,
                                           const std::string& source_name) {
  std::vector<PoseSequence> out;
  std::string line;
  std::size_t line_no = 0;
  const std::size_t j = spec.n_joints();
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const std::string where = source_name + ":" + std::to_string(line_no);
    json obj;
    try {
      obj = json::parse(line);
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, where + ": malformed line: " + e.what());
    }
    require(obj.is_object(), ErrorCode::kFormat, where + ": line is not a JSON object");
    for (const auto& [key, _] : obj.items())
      require(key == "subject" || key == "action" || key == "camera" || key == "frames_2d" ||
                  key == "frames_3d" || key == "extrinsics",
              ErrorCode::kFormat, where + ": unknown key '" + key + "'");
    require(obj.contains("frames_2d"), ErrorCode::kFormat, where + ": missing frames_2d");
    PoseSequence seq;
    try {
      seq.subject = obj.value("subject", "");
      seq.action = obj.value("action", "");
      seq.camera = obj.value("camera", "");
    } catch (const json::exception& e) {
      fail(ErrorCode::kFormat, where + ": " + e.what());
    }
    seq.frames_2d = read_frames(obj.at("frames_2d"), j * 2, where);
    if (obj.contains("frames_3d") && !obj.at("frames_3d").is_null()) {
      seq.frames_3d = read_frames(obj.at("frames_3d"), j * 3, where);
      require(seq.frames_3d.rows() == seq.frames_2d.rows(), ErrorCode::kShapeMismatch,
              where + ": frames_2d and frames_3d lengths differ");
    }
    if (obj.contains("extrinsics") && !obj.at("extrinsics").is_null()) {
      try {
        seq.extrinsics = CameraExtrinsics::from_json(obj.at("extrinsics"));
      } catch (const Error& e) {
        fail(e.code(), where + ": " + e.what());
      }
    }
    out.push_back(std::move(seq));
  }
  return out;
}

std::vector<PoseSequence> ingest(const std::string& path, const skeleton::SkeletonSpec& spec) {
  std::ifstream in(path);
  require(in.good(), ErrorCode::kIo, "cannot open pose file '" + path + "'");
  return parse_pose_lines(in, spec, path);
}

std::string pose_line(const PoseSequence& seq) {
  json obj = {{"subject", seq.subject}, {"action", seq.action}, {"camera", seq.camera},
              {"frames_2d", frames_json(seq.frames_2d)}};
  if (seq.has_3d()) obj["frames_3d"] = frames_json(seq.frames_3d);
  if (seq.extrinsics) obj["extrinsics"] = seq.extrinsics->to_json();
  return obj.dump();
}

void write_pose_file(const std::string& path, const std::vector<PoseSequence>& sequences) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  require(out.good(), ErrorCode::kIo, "cannot write pose file '" + path + "'");
  for (const auto& s : sequences) out << pose_line(s) << '\n';
  out.flush();
  require(out.good(), ErrorCode::kIo, "write failed for '" + path + "'");
}

kernel::Matrix camera_frame_3d(const PoseSequence& seq) {
  if (!seq.extrinsics || !seq.has_3d()) return seq.frames_3d;
  kernel::Matrix out(seq.frames_3d.rows(), seq.frames_3d.cols());
  for (std::size_t f = 0; f < seq.frames_3d.rows(); ++f) {
    auto src = seq.frames_3d.row(f);
    skeleton::Pose p{{src.begin(), src.end()}, 3};
    auto cam = world_to_camera(p, *seq.extrinsics);
    std::copy(cam.coords.begin(), cam.coords.end(), out.row(f).begin());
  }
  return out;
}

PreparedSequence prepare(const PoseSequence& seq, const skeleton::SkeletonSpec& spec) {
  PreparedSequence p{seq.subject, seq.action, {}, {}};
  const std::size_t j1 = spec.n_joints() - 1;
  p.inputs_2d = kernel::Matrix(seq.length(), j1 * 2);
  for (std::size_t f = 0; f < seq.length(); ++f) {
    auto src = seq.frames_2d.row(f);
    auto c = skeleton::root_center({{src.begin(), src.end()}, 2}, spec);
    std::copy(c.coords.begin(), c.coords.end(), p.inputs_2d.row(f).begin());
  }
  if (seq.has_3d()) {
    const kernel::Matrix cam = camera_frame_3d(seq);
    p.targets_3d = kernel::Matrix(seq.length(), j1 * 3);
    for (std::size_t f = 0; f < seq.length(); ++f) {
      auto src = cam.row(f);
      auto c = skeleton::root_center({{src.begin(), src.end()}, 3}, spec);
      std::copy(c.coords.begin(), c.coords.end(), p.targets_3d.row(f).begin());
    }
  }
  return p;
}

std::vector<PreparedSequence> prepare_all(const std::vector<PoseSequence>& seqs,
                                          const skeleton::SkeletonSpec& spec) {
  std::vector<PreparedSequence> out;
  out.reserve(seqs.size());
  for (const auto& s : seqs) out.push_back(prepare(s, spec));
  return out;
}

}  // namespace poselift::pipeline
