#include "zsl/matrix.hpp"

#include <cmath>
#include <string>

#include "zsl/error.hpp"
#include "zsl/kernels.hpp"

namespace zsl {

Matrix Matrix::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  Matrix m(rows.size(), rows.size() == 0 ? 0 : rows.begin()->size());
  std::size_t i = 0;
  for (const auto& r : rows) {
    if (r.size() != m.cols()) throw InvalidArgument("from_rows: ragged row lengths");
    std::size_t j = 0;
    for (double v : r) m(i, j++) = v;
    ++i;
  }
  return m;
}

bool Matrix::all_finite() const {
  for (double v : data_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

std::vector<double> matvec(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.cols()) {
    throw InvalidArgument("matvec: vector length " + std::to_string(x.size()) +
                          " != matrix cols " + std::to_string(a.cols()));
  }
  std::vector<double> y(a.rows());
  for (std::size_t i = 0; i < a.rows(); ++i) y[i] = kernels::dot(a.row(i), x.data(), a.cols());
  return y;
}

std::vector<double> matvec_t(const Matrix& a, std::span<const double> x) {
  if (x.size() != a.rows()) {
    throw InvalidArgument("matvec_t: vector length " + std::to_string(x.size()) +
                          " != matrix rows " + std::to_string(a.rows()));
  }
  std::vector<double> y(a.cols(), 0.0);
  for (std::size_t i = 0; i < a.rows(); ++i) kernels::axpy(x[i], a.row(i), y.data(), a.cols());
  return y;
}

Matrix matmul(const Matrix& a, const Matrix& b) {
  if (a.cols() != b.rows()) throw InvalidArgument("matmul: inner dimensions differ");
  Matrix c(a.rows(), b.cols());
  for (std::size_t i = 0; i < a.rows(); ++i) {
    for (std::size_t l = 0; l < a.cols(); ++l) {
      kernels::axpy(a(i, l), b.row(l), c.row(i), b.cols());
    }
  }
  return c;
}

void add_outer(Matrix& w, double alpha, std::span<const double> x, std::span<const double> y) {
  if (x.size() != w.rows() || y.size() != w.cols()) {
    throw InvalidArgument("add_outer: operand dimensions do not match matrix");
  }
  for (std::size_t i = 0; i < w.rows(); ++i) kernels::axpy(alpha * x[i], y.data(), w.row(i), w.cols());
}

double norm2(std::span<const double> v) {
  return std::sqrt(kernels::dot(v.data(), v.data(), v.size()));
}

std::vector<double> cholesky_solve(const Matrix& a, std::span<const double> b) {
  const std::size_t n = a.rows();
  if (a.cols() != n) throw InvalidArgument("cholesky_solve: matrix not square");
  if (b.size() != n) throw InvalidArgument("cholesky_solve: rhs length mismatch");

  // Lower-triangular factor, in-place over a copy.
  Matrix l(a);
  for (std::size_t j = 0; j < n; ++j) {
    double diag = l(j, j) - kernels::dot(l.row(j), l.row(j), j);
    if (!(diag > 0.0) || !std::isfinite(diag)) {
      throw NumericFailure("cholesky_solve: non-positive pivot at index " + std::to_string(j),
                           static_cast<std::int64_t>(j));
    }
    diag = std::sqrt(diag);
    l(j, j) = diag;
    for (std::size_t i = j + 1; i < n; ++i) {
      l(i, j) = (l(i, j) - kernels::dot(l.row(i), l.row(j), j)) / diag;
    }
  }

  // Forward then back substitution: L z = b, L^T x = z.
  std::vector<double> x(b.begin(), b.end());
  for (std::size_t i = 0; i < n; ++i) {
    x[i] = (x[i] - kernels::dot(l.row(i), x.data(), i)) / l(i, i);
  }
  for (std::size_t ii = n; ii-- > 0;) {
    double acc = x[ii];
    for (std::size_t j = ii + 1; j < n; ++j) acc -= l(j, ii) * x[j];
    x[ii] = acc / l(ii, ii);
  }
  return x;
}

}  // namespace zsl
