#include "kernel/matrix.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "common/error.hpp"

namespace poselift::kernel {

namespace {
std::string dims(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}
}  // namespace

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  require(data_.size() == rows_ * cols_, ErrorCode::kShapeMismatch,
          "matrix data length " + std::to_string(data_.size()) + " != " +
              std::to_string(rows_) + "x" + std::to_string(cols_));
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

bool Matrix::all_finite() const {
  return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  Matrix c(a.rows(), b.cols());
  matmul_acc(a, b, c);
  return c;
}

void matmul_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  require(a.cols() == b.rows() && c.rows() == a.rows() && c.cols() == b.cols(),
          ErrorCode::kShapeMismatch, "matmul: " + dims(a) + " * " + dims(b) + " -> " + dims(c));
  const std::size_t n = a.rows(), k = a.cols(), m = b.cols();
  for (std::size_t i = 0; i < n; ++i) {
    double* out = c.data() + i * m;
    const double* arow = a.data() + i * k;
    for (std::size_t p = 0; p < k; ++p) {
      const double s = arow[p];
      if (s == 0.0) continue;
      const double* brow = b.data() + p * m;
      for (std::size_t j = 0; j < m; ++j) out[j] += s * brow[j];
    }
  }
}

void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c) {
  require(a.rows() == b.rows() && c.rows() == a.cols() && c.cols() == b.cols(),
          ErrorCode::kShapeMismatch,
          "matmul_tn: " + dims(a) + "^T * " + dims(b) + " -> " + dims(c));
  const std::size_t n = a.rows(), p = a.cols(), q = b.cols();
  for (std::size_t r = 0; r < n; ++r) {
    const double* arow = a.data() + r * p;
    const double* brow = b.data() + r * q;
    for (std::size_t i = 0; i < p; ++i) {
      const double s = arow[i];
      if (s == 0.0) continue;
      double* out = c.data() + i * q;
      for (std::size_t j = 0; j < q; ++j) out[j] += s * brow[j];
    }
  }
}

Matrix matmul_nt(const Matrix& a, const Matrix& b) {
  require(a.cols() == b.cols(), ErrorCode::kShapeMismatch,
          "matmul_nt: " + dims(a) + " * " + dims(b) + "^T");
  const std::size_t n = a.rows(), q = a.cols(), p = b.rows();
  Matrix c(n, p);
  for (std::size_t i = 0; i < n; ++i) {
    const double* arow = a.data() + i * q;
    for (std::size_t j = 0; j < p; ++j) {
      const double* brow = b.data() + j * q;
      // Four fixed partial sums; the reduction order never depends on data.
      double s0 = 0, s1 = 0, s2 = 0, s3 = 0;
      std::size_t k = 0;
      for (; k + 4 <= q; k += 4) {
        s0 += arow[k] * brow[k];
        s1 += arow[k + 1] * brow[k + 1];
        s2 += arow[k + 2] * brow[k + 2];
        s3 += arow[k + 3] * brow[k + 3];
      }
      for (; k < q; ++k) s0 += arow[k] * brow[k];
      c(i, j) = (s0 + s1) + (s2 + s3);
    }
  }
  return c;
}

void add_row_vector(Matrix& m, std::span<const double> bias) {
  require(bias.size() == m.cols(), ErrorCode::kShapeMismatch, "add_row_vector: bias length");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) r[j] += bias[j];
  }
}

void accumulate_column_sums(const Matrix& m, std::span<double> acc) {
  require(acc.size() == m.cols(), ErrorCode::kShapeMismatch, "accumulate_column_sums: length");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    auto r = m.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) acc[j] += r[j];
  }
}

Matrix transpose(const Matrix& m) {
  Matrix t(m.cols(), m.rows());
  for (std::size_t i = 0; i < m.rows(); ++i)
    for (std::size_t j = 0; j < m.cols(); ++j) t(j, i) = m(i, j);
  return t;
}

Matrix Tensor3::time_slice(std::size_t s) const {
  Matrix m(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    auto src = frame(i, s);
    std::copy(src.begin(), src.end(), m.row(i).begin());
  }
  return m;
}

void Tensor3::set_time_slice(std::size_t s, const Matrix& m) {
  require(m.rows() == n && m.cols() == d, ErrorCode::kShapeMismatch, "set_time_slice: shape");
  for (std::size_t i = 0; i < n; ++i) {
    auto src = m.row(i);
    std::copy(src.begin(), src.end(), frame(i, s).begin());
  }
}

}  // namespace poselift::kernel
