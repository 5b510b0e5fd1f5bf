#include <doctest.h>

#include <cmath>
#include <vector>

#include "common/error.hpp"
#include "common/parallel.hpp"
#include "common/rng.hpp"
#include "kernel/adam.hpp"
#include "kernel/grad_check.hpp"
#include "kernel/init.hpp"
#include "kernel/layer_norm.hpp"
#include "kernel/matrix.hpp"
#include "testing.hpp"

using namespace poselift;
using namespace poselift::kernel;
using poselift::testing::random_matrix;

namespace {

Matrix naive_matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i)
    for (std::size_t j = 0; j < b.cols(); ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < a.cols(); ++k) s += a(i, k) * b(k, j);
      c(i, j) = s;
    }
  return c;
}

}  // namespace

TEST_CASE("rng streams are reproducible and splits are independent of draws") {
  Rng a(42), b(42);
  for (int i = 0; i < 10; ++i) CHECK(a.next_u64() == b.next_u64());
  Rng c(42);
  const auto before = c.split("x").next_u64();
  c.next_u64();
  CHECK(c.split("x").next_u64() == before);
  CHECK(Rng(42).split("x").next_u64() != Rng(42).split("y").next_u64());
  CHECK(Rng(42).split(1).next_u64() != Rng(42).split(2).next_u64());
  Rng u(7);
  for (int i = 0; i < 1000; ++i) {
    const double x = u.uniform();
    CHECK(x >= 0.0);
    CHECK(x < 1.0);
    CHECK(u.below(5) < 5u);
  }
}

TEST_CASE("rng normal has unit variance") {
  Rng r(3);
  const int n = 100000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double x = r.normal();
    s += x;
    s2 += x * x;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  CHECK(std::abs(mean) < 0.02);
  CHECK(std::abs(var - 1.0) < 0.02);
}

TEST_CASE("matmul: identity, hand values and loop oracle") {
  Rng rng(1);
  const Matrix a = random_matrix(7, 5, rng);
  CHECK(matmul(a, Matrix::identity(5)) == a);

  const Matrix l(2, 2, {1, 2, 3, 4}), r(2, 1, {5, 6});
  const Matrix p = matmul(l, r);
  CHECK(p(0, 0) == 17.0);
  CHECK(p(1, 0) == 39.0);

  const Matrix b = random_matrix(5, 3, rng);
  const Matrix got = matmul(a, b), want = naive_matmul(a, b);
  for (std::size_t i = 0; i < got.size(); ++i) CHECK(std::abs(got.values()[i] - want.values()[i]) < 1e-12);

  CHECK_THROWS_AS(matmul(a, a), Error);
}

TEST_CASE("matmul variants agree with transposed products") {
  Rng rng(2);
  const Matrix a = random_matrix(6, 4, rng), b = random_matrix(6, 3, rng), c = random_matrix(5, 4, rng);
  Matrix tn(4, 3, 1.0);
  matmul_tn_acc(a, b, tn);
  const Matrix want_tn = naive_matmul(transpose(a), b);
  for (std::size_t i = 0; i < tn.size(); ++i) CHECK(std::abs(tn.values()[i] - 1.0 - want_tn.values()[i]) < 1e-12);

  const Matrix nt = matmul_nt(a, c), want_nt = naive_matmul(a, transpose(c));
  for (std::size_t i = 0; i < nt.size(); ++i) CHECK(std::abs(nt.values()[i] - want_nt.values()[i]) < 1e-12);

  Matrix acc(6, 3, 2.0);
  matmul_acc(a, naive_matmul(transpose(a), b), acc);
  const Matrix want_acc = naive_matmul(a, naive_matmul(transpose(a), b));
  for (std::size_t i = 0; i < acc.size(); ++i) CHECK(std::abs(acc.values()[i] - 2.0 - want_acc.values()[i]) < 1e-12);
}

TEST_CASE("tensor3 time slices") {
  Tensor3 x(2, 3, 2);
  for (std::size_t i = 0; i < x.data.size(); ++i) x.data[i] = static_cast<double>(i);
  const Matrix s = x.time_slice(1);
  CHECK(s.rows() == 2);
  CHECK(s(0, 0) == 2.0);
  CHECK(s(1, 1) == 9.0);
  Tensor3 y(2, 3, 2);
  for (std::size_t t = 0; t < 3; ++t) y.set_time_slice(t, x.time_slice(t));
  CHECK(y == x);
}

TEST_CASE("layer_norm values") {
  const std::vector<double> one(3, 1.0), zero(3, 0.0);
  const auto c = layer_norm(std::vector<double>{4, 4, 4}, one, zero);
  for (double v : c) CHECK(v == 0.0);

  const auto y = layer_norm(std::vector<double>{1, 2, 3}, one, zero);
  CHECK(y[0] == doctest::Approx(-1.22474).epsilon(1e-4));
  CHECK(y[1] == doctest::Approx(0.0));
  CHECK(y[2] == doctest::Approx(1.22474).epsilon(1e-4));

  const std::vector<double> bias{0.5, -1, 2};
  const auto b = layer_norm(std::vector<double>{9, -3, 0.25}, zero, bias);
  for (int i = 0; i < 3; ++i) CHECK(b[i] == bias[i]);
}

TEST_CASE("layer_norm gradient passes a finite-difference check") {
  Rng rng(5);
  std::vector<double> x(6), gain(6), bias(6), w(6);
  for (auto* v : {&x, &gain, &bias, &w})
    for (double& e : *v) e = rng.uniform(-1, 1);
  auto f = [&] {
    const auto y = layer_norm(x, gain, bias);
    double s = 0;
    for (std::size_t i = 0; i < y.size(); ++i) s += w[i] * y[i];
    return s;
  };
  const auto g = layer_norm_backward(x, gain, w);
  CHECK(grad_check(f, x, g.dx) < 1e-6);
  CHECK(grad_check(f, gain, g.dgain) < 1e-6);
  CHECK(grad_check(f, bias, g.dbias) < 1e-6);
}

TEST_CASE("segmented layer norm matches per-segment layer_norm") {
  Rng rng(6);
  const Matrix x = random_matrix(3, 8, rng);
  std::vector<double> gain(8), bias(8);
  for (double& v : gain) v = rng.uniform(0.5, 1.5);
  for (double& v : bias) v = rng.uniform(-1, 1);
  SegmentedLayerNorm ln;
  const Matrix y = ln.forward(x, 4, gain, bias);
  for (std::size_t r = 0; r < 3; ++r)
    for (std::size_t s = 0; s < 2; ++s) {
      const auto want = layer_norm(x.row(r).subspan(s * 4, 4), std::span(gain).subspan(s * 4, 4),
                                   std::span(bias).subspan(s * 4, 4));
      for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(y(r, s * 4 + k) - want[k]) < 1e-14);
    }
  CHECK_THROWS_AS(ln.forward(x, 3, gain, bias), Error);
}

TEST_CASE("xavier_uniform bounds and statistics") {
  CHECK(xavier_bound(3, 3) == 1.0);
  Rng rng(9);
  const Matrix w = xavier_uniform(30, 20, rng);
  CHECK(w.rows() == 30);
  CHECK(w.cols() == 20);
  const double a = xavier_bound(30, 20);
  for (double v : w.values()) {
    CHECK(v >= -a);
    CHECK(v <= a);
  }
  const Matrix big = xavier_uniform(100, 1000, rng);  // 10^5 samples
  double s = 0;
  for (double v : big.values()) s += v;
  const double mean = s / static_cast<double>(big.size());
  const double sd = xavier_bound(100, 1000) / std::sqrt(3.0) / std::sqrt(static_cast<double>(big.size()));
  CHECK(std::abs(mean) < 3 * sd);
  CHECK_THROWS_AS(xavier_bound(0, 4), Error);
}

TEST_CASE("adam first step, zero gradient and descent") {
  {
    std::vector<double> p{1.0};
    const std::vector<double> g{0.5};
    auto st = AdamState::for_sizes(std::vector<std::size_t>{1});
    const ParamRef pr[] = {{"p", p}};
    const GradRef gr[] = {{"p", g}};
    adam_step(pr, gr, st, 1e-3);
    CHECK(p[0] - 1.0 == doctest::Approx(-1e-3 * (0.5 / (0.5 + 1e-8))).epsilon(1e-9));
    CHECK(st.step_count == 1);
  }
  {
    std::vector<double> p{1.0, -2.0};
    const std::vector<double> g{0.0, 0.0};
    auto st = AdamState::for_sizes(std::vector<std::size_t>{2});
    const ParamRef pr[] = {{"p", p}};
    const GradRef gr[] = {{"p", g}};
    adam_step(pr, gr, st, 0.1);
    CHECK(p[0] == 1.0);
    CHECK(p[1] == -2.0);
    CHECK(st.step_count == 1);
  }
  {
    std::vector<double> x{1.0};
    std::vector<double> g{0.0};
    auto st = AdamState::for_sizes(std::vector<std::size_t>{1});
    for (int i = 0; i < 100; ++i) {
      g[0] = 2 * x[0];
      const ParamRef pr[] = {{"x", x}};
      const GradRef gr[] = {{"x", g}};
      adam_step(pr, gr, st, 0.1);
    }
    CHECK(std::abs(x[0]) < 1.0);
  }
}

TEST_CASE("adam rejects non-finite gradients before touching parameters") {
  std::vector<double> a{1.0}, b{2.0};
  const std::vector<double> ga{0.1}, gb{NAN};
  auto st = AdamState::for_sizes(std::vector<std::size_t>{1, 1});
  const ParamRef pr[] = {{"a", a}, {"b", b}};
  const GradRef gr[] = {{"a", ga}, {"b", gb}};
  try {
    adam_step(pr, gr, st, 0.1);
    FAIL("expected an error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::kNumeric);
    CHECK(std::string(e.what()).find("b") != std::string::npos);
  }
  CHECK(a[0] == 1.0);
  CHECK(st.step_count == 0);
}

TEST_CASE("grad_check detects right and wrong gradients") {
  std::vector<double> x{3.0};
  auto f = [&] { return x[0] * x[0]; };
  CHECK(grad_check(f, x, std::vector<double>{6.0}) < 1e-7);
  CHECK(x[0] == 3.0);
  const double err = grad_check(f, x, std::vector<double>{12.0});
  CHECK(err == doctest::Approx(1.0 / 3.0).epsilon(1e-6));
  CHECK(err > 1e-4);
}

TEST_CASE("parallel_for visits every index once and rethrows") {
  std::vector<int> hits(1000, 0);
  parallel_for(hits.size(), [&](std::size_t i) { hits[i] += 1; });
  for (int h : hits) CHECK(h == 1);
  CHECK_THROWS(parallel_for(10, [](std::size_t i) {
    if (i == 7) throw std::runtime_error("boom");
  }));
  CHECK(worker_count() >= 1);
}
