#include "pipeline/synth.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "common/error.hpp"
#include "common/rng.hpp"

namespace poselift::pipeline {

namespace {

constexpr std::size_t kJoints = 17;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

Mat3 mul(const Mat3& a, const Mat3& b) {
  Mat3 c{};
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 3; ++j) c[i][j] = a[i][0] * b[0][j] + a[i][1] * b[1][j] + a[i][2] * b[2][j];
  return c;
}

Vec3 rotate(const Mat3& r, const Vec3& v) {
  return {r[0][0] * v[0] + r[0][1] * v[1] + r[0][2] * v[2],
          r[1][0] * v[0] + r[1][1] * v[1] + r[1][2] * v[2],
          r[2][0] * v[0] + r[2][1] * v[1] + r[2][2] * v[2]};
}

// Rz(z) * Ry(y) * Rx(x)
Mat3 euler_zyx(double x, double y, double z) {
  const double cx = std::cos(x), sx = std::sin(x);
  const double cy = std::cos(y), sy = std::sin(y);
  const double cz = std::cos(z), sz = std::sin(z);
  const Mat3 rx = {{{1, 0, 0}, {0, cx, -sx}, {0, sx, cx}}};
  const Mat3 ry = {{{cy, 0, sy}, {0, 1, 0}, {-sy, 0, cy}}};
  const Mat3 rz = {{{cz, -sz, 0}, {sz, cz, 0}, {0, 0, 1}}};
  return mul(rz, mul(ry, rx));
}

enum Part { kTorso, kLeg, kArm };

// Rest angle and swing amplitude (rad) about x, y, z for every joint whose
// rotation moves a child bone. Leaves have zero entries.
struct JointMotion {
  Vec3 rest;
  Vec3 amp;
  Part part;
};

const std::array<JointMotion, kJoints>& motions() {
  static const std::array<JointMotion, kJoints> m = {{
      {{0, 0, 0}, {0.05, 0.05, 0.30}, kTorso},        // hip (root)
      {{0, 0, 0}, {0.50, 0.15, 0.10}, kLeg},          // r_hip
      {{0.45, 0, 0}, {0.40, 0, 0}, kLeg},             // r_knee
      {{0, 0, 0}, {0, 0, 0}, kLeg},                   // r_ankle
      {{0, 0, 0}, {0.50, 0.15, 0.10}, kLeg},          // l_hip
      {{0.45, 0, 0}, {0.40, 0, 0}, kLeg},             // l_knee
      {{0, 0, 0}, {0, 0, 0}, kLeg},                   // l_ankle
      {{0, 0, 0}, {0.10, 0.10, 0.15}, kTorso},        // spine
      {{0, 0, 0}, {0.10, 0.05, 0.10}, kTorso},        // thorax
      {{0, 0, 0}, {0.20, 0, 0.30}, kTorso},           // neck
      {{0, 0, 0}, {0, 0, 0}, kTorso},                 // head
      {{0, -0.30, 0}, {0.70, 0.40, 0.20}, kArm},      // l_shoulder
      {{-0.60, 0, 0}, {0.60, 0, 0}, kArm},            // l_elbow
      {{0, 0, 0}, {0, 0, 0}, kArm},                   // l_wrist
      {{0, 0.30, 0}, {0.70, 0.40, 0.20}, kArm},       // r_shoulder
      {{-0.60, 0, 0}, {0.60, 0, 0}, kArm},            // r_elbow
      {{0, 0, 0}, {0, 0, 0}, kArm},                   // r_wrist
  }};
  return m;
}

struct ActionProfile {
  const char* name;
  double leg, arm, torso;
};

constexpr ActionProfile kActions[] = {
    {"Walk", 1.0, 0.6, 0.3},  {"Wave", 0.1, 1.2, 0.3},  {"Squat", 1.2, 0.3, 0.6},
    {"Reach", 0.3, 1.0, 0.8}, {"Sway", 0.3, 0.4, 1.2},
};
constexpr std::size_t kNumActions = sizeof(kActions) / sizeof(kActions[0]);

struct Clip {
  kernel::Matrix world;  // L x 51
  kernel::Matrix image;  // L x 34
  bool ok = true;
};

Clip animate(std::size_t length, const CameraExtrinsics& cam, const SynthOptions& opt,
             const ActionProfile& action, Rng& rng) {
  const auto& chain = h36m17_chain();
  const auto& mot = motions();
  const double scale = rng.uniform(0.9, 1.1);
  const double base_f = rng.uniform(opt.min_frequency_hz, opt.max_frequency_hz);
  const double yaw0 = rng.uniform(0.0, kTwoPi);
  const Vec3 root0 = {rng.uniform(-400.0, 400.0), rng.uniform(-400.0, 400.0), 950.0 * scale};
  const Vec3 drift = {rng.uniform(-150.0, 150.0), rng.uniform(-150.0, 150.0), rng.uniform(-30.0, 30.0)};
  const double drift_phase = rng.uniform(0.0, kTwoPi);

  // Per-DOF harmonic (1x or 2x the base frequency) and phase.
  std::array<Vec3, kJoints> freq{}, phase{};
  for (std::size_t j = 0; j < kJoints; ++j)
    for (int a = 0; a < 3; ++a) {
      freq[j][a] = base_f * (rng.uniform() < 0.7 ? 1.0 : 2.0);
      phase[j][a] = rng.uniform(0.0, kTwoPi);
    }

  Clip clip{kernel::Matrix(length, kJoints * 3), kernel::Matrix(length, kJoints * 2), true};
  std::array<Mat3, kJoints> global{};
  std::array<Vec3, kJoints> pos{};
  for (std::size_t f = 0; f < length; ++f) {
    const double time = static_cast<double>(f) / opt.fps;
    for (std::size_t j = 0; j < kJoints; ++j) {
      const double gain = mot[j].part == kLeg ? action.leg : mot[j].part == kArm ? action.arm : action.torso;
      Vec3 ang{};
      for (int a = 0; a < 3; ++a)
        ang[a] = mot[j].rest[a] + gain * mot[j].amp[a] * std::sin(kTwoPi * freq[j][a] * time + phase[j][a]);
      Mat3 local = euler_zyx(ang[0], ang[1], ang[2]);
      if (chain.parent[j] < 0) {
        global[j] = mul(euler_zyx(0, 0, yaw0), local);
        const double s = std::sin(kTwoPi * base_f * 0.5 * time + drift_phase);
        pos[j] = {root0[0] + drift[0] * s, root0[1] + drift[1] * s, root0[2] + drift[2] * s};
      } else {
        const auto p = static_cast<std::size_t>(chain.parent[j]);
        global[j] = mul(global[p], local);
        const Vec3 off = {chain.offset[j][0] * scale, chain.offset[j][1] * scale, chain.offset[j][2] * scale};
        const Vec3 bone = rotate(global[p], off);
        pos[j] = {pos[p][0] + bone[0], pos[p][1] + bone[1], pos[p][2] + bone[2]};
      }
    }
    for (std::size_t j = 0; j < kJoints; ++j) {
      for (int a = 0; a < 3; ++a) clip.world(f, j * 3 + a) = pos[j][a];
      const Vec3 pc = cam.to_camera(pos[j]);
      if (!(pc[2] >= opt.min_depth_mm)) clip.ok = false;
      const auto uv = opt.intrinsics.project(pc);
      clip.image(f, j * 2) = uv[0];
      clip.image(f, j * 2 + 1) = uv[1];
    }
  }
  return clip;
}

}  // namespace

const KinematicChain& h36m17_chain() {
  // Parents are listed before children, so one forward pass suffices.
  static const KinematicChain chain = {
      {-1, 0, 1, 2, 0, 4, 5, 0, 7, 8, 9, 8, 11, 12, 8, 14, 15},
      {{
          {0, 0, 0},         // hip
          {-130, 0, 0},      // r_hip
          {0, 0, -440},      // r_knee
          {0, 0, -440},      // r_ankle
          {130, 0, 0},       // l_hip
          {0, 0, -440},      // l_knee
          {0, 0, -440},      // l_ankle
          {0, 10, 230},      // spine
          {0, 0, 250},       // thorax
          {0, 20, 110},      // neck
          {0, 0, 120},       // head
          {160, 0, -20},     // l_shoulder
          {0, 0, -280},      // l_elbow
          {0, 0, -250},      // l_wrist
          {-160, 0, -20},    // r_shoulder
          {0, 0, -280},      // r_elbow
          {0, 0, -250},      // r_wrist
      }},
  };
  return chain;
}

std::vector<PoseSequence> synth_generate(std::size_t n_sequences, std::size_t length,
                                         const CameraExtrinsics& cam, std::uint64_t seed,
                                         const SynthOptions& options) {
  require(length >= 2, ErrorCode::kInvalidArgument, "synth: length >= 2 required");
  require(options.min_frequency_hz >= 0.0 && options.max_frequency_hz >= options.min_frequency_hz &&
              options.fps > 0.0,
          ErrorCode::kInvalidArgument, "synth: invalid frequency range or fps");
  const Rng base = Rng(seed).split("synth");
  std::vector<PoseSequence> out;
  out.reserve(n_sequences);
  for (std::size_t i = 0; i < n_sequences; ++i) {
    const ActionProfile& action = kActions[i % kNumActions];
    const Rng seq_rng = base.split(static_cast<std::uint64_t>(i));
    Clip clip;
    bool ok = false;
    for (int attempt = 0; attempt < options.max_attempts && !ok; ++attempt) {
      Rng rng = seq_rng.split(static_cast<std::uint64_t>(attempt));
      clip = animate(length, cam, options, action, rng);
      ok = clip.ok;
    }
    require(ok, ErrorCode::kInvalidArgument,
            "synth: camera sees the figure behind the image plane in every attempt (sequence " +
                std::to_string(i) + ")");
    PoseSequence seq;
    seq.subject = "S" + std::to_string(1 + (i / kNumActions) % 5);
    seq.action = action.name;
    seq.camera = "synth0";
    seq.frames_2d = std::move(clip.image);
    seq.frames_3d = std::move(clip.world);
    seq.extrinsics = cam;
    out.push_back(std::move(seq));
  }
  return out;
}

}  // namespace poselift::pipeline
