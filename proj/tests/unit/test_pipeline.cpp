#include <doctest.h>

#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "common/error.hpp"
#include "common/rng.hpp"
#include "loss/loss.hpp"
#include "pipeline/camera.hpp"
#include "pipeline/noise.hpp"
#include "pipeline/norm_stats.hpp"
#include "pipeline/pose_data.hpp"
#include "pipeline/synth.hpp"
#include "pipeline/windows.hpp"
#include "skeleton/skeleton.hpp"
#include "testing.hpp"

using namespace poselift;
using namespace poselift::pipeline;
using skeleton::JointGroup;
using skeleton::Pose;
using skeleton::SkeletonSpec;

namespace {

double dist3(const double* a, const double* b) {
  return std::sqrt((a[0] - b[0]) * (a[0] - b[0]) + (a[1] - b[1]) * (a[1] - b[1]) + (a[2] - b[2]) * (a[2] - b[2]));
}

// Gram-Schmidt on random rows, flipped to det +1.
Mat3 random_rotation(Rng& rng) {
  Mat3 q{};
  for (int i = 0; i < 3; ++i) {
    Vec3 v{rng.normal(), rng.normal(), rng.normal()};
    for (int j = 0; j < i; ++j) {
      const double d = v[0] * q[j][0] + v[1] * q[j][1] + v[2] * q[j][2];
      for (int k = 0; k < 3; ++k) v[k] -= d * q[j][k];
    }
    const double n = std::sqrt(v[0] * v[0] + v[1] * v[1] + v[2] * v[2]);
    for (int k = 0; k < 3; ++k) q[i][k] = v[k] / n;
  }
  const double det = q[0][0] * (q[1][1] * q[2][2] - q[1][2] * q[2][1]) -
                     q[0][1] * (q[1][0] * q[2][2] - q[1][2] * q[2][0]) +
                     q[0][2] * (q[1][0] * q[2][1] - q[1][1] * q[2][0]);
  if (det < 0)
    for (int k = 0; k < 3; ++k) q[2][k] = -q[2][k];
  return q;
}

}  // namespace

TEST_CASE("default skeleton groups") {
  const auto spec = SkeletonSpec::h36m17();
  CHECK(spec.n_joints() == 17);
  CHECK(spec.root_index() == 0);
  auto joints_of = [&](JointGroup g) {
    std::set<std::string> names;
    for (std::size_t idx : skeleton::group_mask(spec, g, 3)) {
      // mask holds coordinate indices of the root-removed vector
      const std::size_t rootless = idx / 3;
      names.insert(spec.joint_names()[rootless >= spec.root_index() ? rootless + 1 : rootless]);
    }
    return names;
  };
  CHECK(joints_of(JointGroup::kLimbArm) == std::set<std::string>{"l_elbow", "l_wrist", "r_elbow", "r_wrist"});
  CHECK(joints_of(JointGroup::kLimbLeg) == std::set<std::string>{"l_knee", "l_ankle", "r_knee", "r_ankle"});

  std::vector<int> seen(16 * 3, 0);
  for (JointGroup g : skeleton::kAllGroups)
    for (std::size_t idx : skeleton::group_mask(spec, g)) seen[idx] += 1;
  for (int s : seen) CHECK(s == 1);
}

TEST_CASE("skeleton json validation") {
  const auto spec = SkeletonSpec::h36m17();
  CHECK(SkeletonSpec::from_json(spec.to_json()) == spec);
  auto j = spec.to_json();
  j["extra"] = 1;
  CHECK_THROWS_AS(SkeletonSpec::from_json(j), Error);
  auto dup = spec.to_json();
  dup["groups"]["limb_arm"].push_back("l_knee");
  CHECK_THROWS_AS(SkeletonSpec::from_json(dup), Error);
  auto missing = spec.to_json();
  missing["groups"]["limb_arm"].erase(0);
  CHECK_THROWS_AS(SkeletonSpec::from_json(missing), Error);
  auto bad_group = spec.to_json();
  bad_group["groups"]["tail"] = nlohmann::json::array();
  CHECK_THROWS_AS(SkeletonSpec::from_json(bad_group), Error);
}

TEST_CASE("root_center") {
  const auto spec = SkeletonSpec::h36m17();
  Pose p{std::vector<double>(17 * 3, 0.0), 3};
  for (std::size_t k = 3; k < p.coords.size(); ++k) p.coords[k] = static_cast<double>(k);
  const Pose z = skeleton::root_center(p, spec);
  CHECK(z.coords.size() == 16 * 3);
  for (std::size_t k = 0; k < z.coords.size(); ++k) CHECK(z.coords[k] == p.coords[k + 3]);

  Pose q{std::vector<double>(17 * 3, 0.0), 3};
  q.coords[0] = 10, q.coords[1] = 20, q.coords[2] = 30;
  q.coords[5 * 3] = 13, q.coords[5 * 3 + 1] = 24, q.coords[5 * 3 + 2] = 30;
  const Pose r = skeleton::root_center(q, spec);
  CHECK(r.coords[4 * 3] == 3.0);
  CHECK(r.coords[4 * 3 + 1] == 4.0);
  CHECK(r.coords[4 * 3 + 2] == 0.0);

  Rng rng(1);
  Pose s{std::vector<double>(17 * 3), 3};
  for (double& v : s.coords) v = rng.uniform(-1000, 1000);
  const Pose c = skeleton::root_center(s, spec);
  for (std::size_t j = 1; j < 17; ++j)
    for (int a = 0; a < 3; ++a) CHECK(c.coords[(j - 1) * 3 + a] == s.coords[j * 3 + a] - s.coords[a]);
  CHECK(skeleton::insert_root(c, spec).coords.size() == 17 * 3);
}

TEST_CASE("fit_norm and normalize") {
  const auto s = fit_norm(kernel::Matrix(2, 2, {0, 0, 2, 2}));
  CHECK(s.mean == std::vector<double>{1, 1});
  CHECK(s.std == std::vector<double>{1, 1});

  const auto c = fit_norm(kernel::Matrix(3, 1, {5, 5, 5}));
  CHECK(c.std[0] == kStdFloor);
  CHECK(normalize(std::vector<double>{5}, c)[0] == 0.0);

  Rng rng(2);
  const auto m = poselift::testing::random_matrix(100, 4, rng, 10.0);
  const auto st = fit_norm(m);
  for (std::size_t k = 0; k < 4; ++k) {
    double mean = 0;
    for (std::size_t i = 0; i < 100; ++i) mean += m(i, k);
    mean /= 100;
    double var = 0;
    for (std::size_t i = 0; i < 100; ++i) var += (m(i, k) - mean) * (m(i, k) - mean);
    CHECK(std::abs(st.mean[k] - mean) < 1e-10);
    CHECK(std::abs(st.std[k] - std::sqrt(var / 100)) < 1e-10);
  }
  for (double v : normalize(st.mean, st)) CHECK(v == 0.0);
  std::vector<double> up(4);
  for (std::size_t k = 0; k < 4; ++k) up[k] = st.mean[k] + st.std[k];
  for (double v : normalize(up, st)) CHECK(v == doctest::Approx(1.0).epsilon(1e-12));
  const auto row = m.row(7);
  const auto back = denormalize(normalize(row, st), st);
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(back[k] - row[k]) < 1e-9);
  CHECK_THROWS_AS(fit_norm(kernel::Matrix()), Error);
  CHECK_THROWS_AS(normalize(std::vector<double>{1, 2}, st), Error);
  CHECK(NormStats::from_json(st.to_json()) == st);
}

TEST_CASE("world_to_camera conventions") {
  Rng rng(3);
  Pose p{std::vector<double>(17 * 3), 3};
  for (double& v : p.coords) v = rng.uniform(-1000, 1000);
  CHECK(world_to_camera(p, CameraExtrinsics::identity()).coords == p.coords);

  const CameraExtrinsics rz({{{0, 1, 0}, {-1, 0, 0}, {0, 0, 1}}}, {0, 0, 0});
  const Vec3 q = rz.to_camera({1, 0, 0});
  CHECK(q[0] == 0.0);
  CHECK(q[1] == -1.0);
  CHECK(q[2] == 0.0);

  for (int trial = 0; trial < 10; ++trial) {
    const CameraExtrinsics cam(random_rotation(rng), {rng.uniform(-5e3, 5e3), rng.uniform(-5e3, 5e3), rng.uniform(-5e3, 5e3)});
    const Pose c = world_to_camera(p, cam);
    for (std::size_t a = 0; a < 17; ++a)
      for (std::size_t b = a + 1; b < 17; ++b)
        CHECK(std::abs(dist3(&c.coords[a * 3], &c.coords[b * 3]) - dist3(&p.coords[a * 3], &p.coords[b * 3])) < 1e-9);
  }
  CHECK_THROWS_AS(CameraExtrinsics({{{1, 0, 0}, {0, 1, 0}, {0, 0, -1}}}, {0, 0, 0}), Error);
  CHECK_THROWS_AS(CameraExtrinsics({{{2, 0, 0}, {0, 1, 0}, {0, 0, 1}}}, {0, 0, 0}), Error);
  const auto cam = CameraExtrinsics::synthetic_default();
  CHECK(CameraExtrinsics::from_json(cam.to_json()) == cam);
}

TEST_CASE("pinhole projection") {
  const PinholeIntrinsics k;
  const auto uv = k.project({100, -50, 2000});
  CHECK(uv[0] == 1000.0 * 100 / 2000 + 500);
  CHECK(uv[1] == 1000.0 * -50 / 2000 + 500);
}

TEST_CASE("windows: counts and reconstruction") {
  CHECK(window_starts(7, 5) == std::vector<std::size_t>{0, 1, 2});
  CHECK(window_starts(5, 5).size() == 1);
  CHECK_THROWS_AS(window_starts(4, 5), Error);

  PreparedSequence seq;
  seq.inputs_2d = kernel::Matrix(100, 2);
  seq.targets_3d = kernel::Matrix(100, 3);
  for (std::size_t f = 0; f < 100; ++f) {
    seq.inputs_2d(f, 0) = static_cast<double>(f);
    seq.targets_3d(f, 0) = static_cast<double>(f);
  }
  const auto w = make_windows(seq, 5);
  CHECK(w.size() == 96);
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i].start == i);
    CHECK(w[i].inputs_2d(0, 0) == static_cast<double>(i));
  }
}

TEST_CASE("assemble_batch reverses 2D time and keeps 3D order") {
  Window w;
  w.inputs_2d = kernel::Matrix(5, 2);
  w.targets_3d = kernel::Matrix(5, 3);
  for (std::size_t f = 0; f < 5; ++f) {
    w.inputs_2d(f, 0) = w.inputs_2d(f, 1) = static_cast<double>(f + 1);
    for (int a = 0; a < 3; ++a) w.targets_3d(f, a) = static_cast<double>(f + 1);
  }
  const NormStats s2{{0, 0}, {1, 1}}, s3{{0, 0, 0}, {1, 1, 1}};
  const auto b = assemble_batch(std::span<const Window>(&w, 1), s2, s3);
  CHECK(b.size() == 1);
  CHECK(b.steps() == 5);
  for (std::size_t t = 0; t < 5; ++t) {
    CHECK(b.inputs_2d.at(0, t, 0) == static_cast<double>(5 - t));
    CHECK(b.targets_3d.at(0, t, 0) == static_cast<double>(t + 1));
  }
  CHECK(reverse_time(b.inputs_2d) != b.inputs_2d);
  CHECK(reverse_time(reverse_time(b.inputs_2d)) == b.inputs_2d);

  Window one;
  one.inputs_2d = kernel::Matrix(1, 2, {3, 4});
  const auto b1 = assemble_batch(std::span<const Window>(&one, 1), s2, s3);
  CHECK(b1.inputs_2d.at(0, 0, 1) == 4.0);
  CHECK(b1.targets_3d.d == 0);
}

TEST_CASE("gaussian noise") {
  Rng rng(4);
  kernel::Tensor3 x = poselift::testing::random_tensor(10, 5, 4, rng);
  CHECK(add_gaussian_noise(x, 0.0, 1) == x);
  CHECK(add_gaussian_noise(x, 3.0, 1) == add_gaussian_noise(x, 3.0, 1));
  CHECK(add_gaussian_noise(x, 3.0, 1) != add_gaussian_noise(x, 3.0, 2));
  CHECK_THROWS_AS(add_gaussian_noise(x, -1.0, 1), Error);

  kernel::Tensor3 z(1000, 10, 10, 0.0);  // 10^5 samples
  const auto n = add_gaussian_noise(z, 10.0, 7);
  double s = 0, s2 = 0;
  for (double v : n.data) s += v, s2 += v * v;
  const double cnt = static_cast<double>(n.data.size());
  const double sd = std::sqrt(s2 / cnt - (s / cnt) * (s / cnt));
  CHECK(sd >= 9.9);
  CHECK(sd <= 10.1);
}

TEST_CASE("synthetic sequences: rigid bones, pinhole 2D, determinism") {
  const auto cam = CameraExtrinsics::synthetic_default();
  const auto seqs = synth_generate(6, 30, cam, 5);
  CHECK(seqs.size() == 6);
  CHECK(synth_generate(6, 30, cam, 5) == seqs);
  CHECK(synth_generate(6, 30, cam, 6) != seqs);
  CHECK_THROWS_AS(synth_generate(1, 1, cam, 0), Error);
  const auto& chain = h36m17_chain();
  const PinholeIntrinsics k;
  for (const auto& s : seqs) {
    CHECK(s.length() == 30);
    CHECK(s.frames_3d.cols() == 51);
    CHECK(s.frames_3d.all_finite());
    for (std::size_t j = 1; j < 17; ++j) {
      const auto p = static_cast<std::size_t>(chain.parent[j]);
      const double l0 = dist3(s.frames_3d.row(0).data() + j * 3, s.frames_3d.row(0).data() + p * 3);
      for (std::size_t f = 1; f < 30; ++f) CHECK(std::abs(dist3(s.frames_3d.row(f).data() + j * 3, s.frames_3d.row(f).data() + p * 3) - l0) < 1e-6);
    }
    const auto cf = camera_frame_3d(s);
    for (std::size_t f = 0; f < 30; f += 7)
      for (std::size_t j = 0; j < 17; ++j) {
        const auto uv = k.project({cf(f, j * 3), cf(f, j * 3 + 1), cf(f, j * 3 + 2)});
        CHECK(std::abs(s.frames_2d(f, j * 2) - uv[0]) < 1e-9);
        CHECK(std::abs(s.frames_2d(f, j * 2 + 1) - uv[1]) < 1e-9);
        CHECK(cf(f, j * 3 + 2) >= 500.0);
      }
  }
}

TEST_CASE("static synthetic pose has zero temporal derivative") {
  SynthOptions opt;
  opt.min_frequency_hz = opt.max_frequency_hz = 0.0;
  const auto seqs = synth_generate(2, 10, CameraExtrinsics::synthetic_default(), 3, opt);
  const auto spec = SkeletonSpec::h36m17();
  for (const auto& s : seqs) {
    for (std::size_t f = 1; f < 10; ++f)
      for (std::size_t c = 0; c < 51; ++c) CHECK(s.frames_3d(f, c) == s.frames_3d(0, c));
    const auto p = prepare(s, spec);
    kernel::Tensor3 t(1, 10, 48);
    for (std::size_t f = 0; f < 10; ++f)
      for (std::size_t c = 0; c < 48; ++c) t.at(0, f, c) = p.targets_3d(f, c);
    CHECK(loss::smoothness_term(t, spec, loss::LossWeights{}) == 0.0);
  }
}

TEST_CASE("pose file ingest") {
  const auto spec = SkeletonSpec::h36m17();
  const auto dir = poselift::testing::scratch_dir("ingest");
  {
    std::ofstream((dir / "empty.jsonl").string());
    CHECK(ingest((dir / "empty.jsonl").string(), spec).empty());
  }
  const auto seqs = synth_generate(4, 12, CameraExtrinsics::synthetic_default(), 9);
  write_pose_file((dir / "s.jsonl").string(), seqs);
  CHECK(ingest((dir / "s.jsonl").string(), spec) == seqs);

  PoseSequence five = seqs[0];
  five.frames_2d = kernel::Matrix(5, 34, 1.0);
  five.frames_3d = kernel::Matrix();
  five.extrinsics.reset();
  std::istringstream one(pose_line(five) + "\n\n");
  const auto got = parse_pose_lines(one, spec);
  CHECK(got.size() == 1);
  CHECK(got[0].length() == 5);
  CHECK(!got[0].has_3d());

  std::istringstream bad_key("{\"subject\":\"a\",\"action\":\"b\",\"camera\":\"c\",\"frames_2d\":[],\"oops\":1}\n");
  CHECK_THROWS_AS(parse_pose_lines(bad_key, spec), Error);
  std::istringstream short_row(pose_line(five) + "\n{\"subject\":\"a\",\"action\":\"b\",\"camera\":\"c\",\"frames_2d\":[[1,2]]}\n");
  try {
    parse_pose_lines(short_row, spec, "x.jsonl");
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("x.jsonl:2") != std::string::npos);
  }
  CHECK_THROWS_AS(ingest((dir / "missing.jsonl").string(), spec), Error);
}

TEST_CASE("prepare root-centers in camera frame") {
  const auto spec = SkeletonSpec::h36m17();
  const auto s = synth_generate(1, 4, CameraExtrinsics::synthetic_default(), 2)[0];
  const auto p = prepare(s, spec);
  const auto cf = camera_frame_3d(s);
  CHECK(p.inputs_2d.cols() == 32);
  CHECK(p.targets_3d.cols() == 48);
  for (std::size_t f = 0; f < 4; ++f)
    for (std::size_t j = 1; j < 17; ++j) {
      for (int a = 0; a < 2; ++a) CHECK(p.inputs_2d(f, (j - 1) * 2 + a) == s.frames_2d(f, j * 2 + a) - s.frames_2d(f, a));
      for (int a = 0; a < 3; ++a) CHECK(p.targets_3d(f, (j - 1) * 3 + a) == cf(f, j * 3 + a) - cf(f, a));
    }
}
