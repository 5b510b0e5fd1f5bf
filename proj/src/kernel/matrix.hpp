#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace poselift::kernel {

// Dense row-major matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }
  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  void fill(double v);
  bool all_finite() const;

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// C = A * B.
Matrix matmul(const Matrix& a, const Matrix& b);
// C += A * B.
void matmul_acc(const Matrix& a, const Matrix& b, Matrix& c);
// C += A^T * B. A is n x p, B is n x q, C is p x q.
void matmul_tn_acc(const Matrix& a, const Matrix& b, Matrix& c);
// C = A * B^T. A is n x q, B is p x q, result n x p.
Matrix matmul_nt(const Matrix& a, const Matrix& b);

// Adds `bias` (length cols) to every row.
void add_row_vector(Matrix& m, std::span<const double> bias);
// acc[j] += sum_i m(i, j).
void accumulate_column_sums(const Matrix& m, std::span<double> acc);

Matrix transpose(const Matrix& m);

// Three-way array laid out [n][t][d], the batch x time x feature layout used
// for sequence batches and predictions.
struct Tensor3 {
  std::size_t n = 0;
  std::size_t t = 0;
  std::size_t d = 0;
  std::vector<double> data;

  Tensor3() = default;
  Tensor3(std::size_t n_, std::size_t t_, std::size_t d_, double fill = 0.0)
      : n(n_), t(t_), d(d_), data(n_ * t_ * d_, fill) {}

  double& at(std::size_t i, std::size_t s, std::size_t k) { return data[(i * t + s) * d + k]; }
  double at(std::size_t i, std::size_t s, std::size_t k) const { return data[(i * t + s) * d + k]; }

  std::span<double> frame(std::size_t i, std::size_t s) { return {data.data() + (i * t + s) * d, d}; }
  std::span<const double> frame(std::size_t i, std::size_t s) const {
    return {data.data() + (i * t + s) * d, d};
  }

  // Time slice s as an n x d matrix (copy).
  Matrix time_slice(std::size_t s) const;
  void set_time_slice(std::size_t s, const Matrix& m);

  bool same_shape(const Tensor3& o) const { return n == o.n && t == o.t && d == o.d; }
  friend bool operator==(const Tensor3&, const Tensor3&) = default;
};

}  // namespace poselift::kernel
