#ifndef ZSL_MATRIX_HPP_
#define ZSL_MATRIX_HPP_

#include <cstddef>
#include <initializer_list>
#include <span>
#include <vector>

namespace zsl {

// Dense row-major f64 matrix. Deliberately small surface: the pipeline only
// needs matvec/matmul/outer updates and an SPD solve.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix from_rows(std::initializer_list<std::initializer_list<double>> rows);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool empty() const { return data_.empty(); }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }
  std::span<const double> row_span(std::size_t i) const { return {row(i), cols_}; }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }
  const std::vector<double>& values() const { return data_; }

  bool all_finite() const;

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// y = A x, where x has a.cols() entries.
std::vector<double> matvec(const Matrix& a, std::span<const double> x);

// y = A^T x, where x has a.rows() entries.
std::vector<double> matvec_t(const Matrix& a, std::span<const double> x);

// C = A B.
Matrix matmul(const Matrix& a, const Matrix& b);

// w += alpha * x y^T, with x.size() == w.rows() and y.size() == w.cols().
void add_outer(Matrix& w, double alpha, std::span<const double> x, std::span<const double> y);

double norm2(std::span<const double> v);

// Solves (SPD) a * x = b via Cholesky. Throws NumericFailure when a pivot is
// not strictly positive (singular or indefinite system).
std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b);

}  // namespace zsl

#endif  // ZSL_MATRIX_HPP_
