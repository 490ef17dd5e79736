#include <cmath>
#include <cstddef>

#include "zsl/kernels.hpp"

namespace zsl {
namespace kernels {
namespace {

double dot_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc = std::fma(a[i], b[i], acc);
  return acc;
}

void axpy_scalar(double alpha, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(alpha, x[i], y[i]);
}

void scale_scalar(double alpha, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= alpha;
}

void hadamard_scalar(const double* a, const double* b, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = a[i] * b[i];
}

double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}

double sq_dist_scalar(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc = std::fma(d, d, acc);
  }
  return acc;
}

}  // namespace

const Backend& scalar_backend() {
  static const Backend backend = {
      "scalar",       dot_scalar, axpy_scalar, scale_scalar,
      hadamard_scalar, sum_scalar, sq_dist_scalar,
  };
  return backend;
}

}  // namespace kernels
}  // namespace zsl
