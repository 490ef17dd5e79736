#ifndef ZSL_KERNELS_HPP_
#define ZSL_KERNELS_HPP_

#include <cstddef>

// Dense f64 inner loops behind a runtime-dispatched backend. The scalar
// backend is the reference; SIMD backends must agree with it elementwise
// bit-for-bit (axpy/scale/hadamard/sq_dist use one fused rounding per element
// in every backend) and to reassociation tolerance for reductions (dot/sum).
//
// Selection: ZSL_KERNELS=scalar|avx2 overrides, otherwise the best backend
// the CPU supports is picked once at first use.

namespace zsl {
namespace kernels {

struct Backend {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  void (*axpy)(double alpha, const double* x, double* y, std::size_t n);  // y += alpha*x
  void (*scale)(double alpha, double* x, std::size_t n);                  // x *= alpha
  void (*hadamard)(const double* a, const double* b, double* out, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sq_dist)(const double* a, const double* b, std::size_t n);  // ||a-b||^2
};

const Backend& scalar_backend();
bool avx2_available();            // compiled in and supported by this CPU
const Backend* avx2_backend();    // nullptr when not compiled in
const Backend& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double alpha, const double* x, double* y, std::size_t n) {
  active().axpy(alpha, x, y, n);
}
inline void scale(double alpha, double* x, std::size_t n) { active().scale(alpha, x, n); }
inline void hadamard(const double* a, const double* b, double* out, std::size_t n) {
  active().hadamard(a, b, out, n);
}
inline double sum(const double* x, std::size_t n) { return active().sum(x, n); }
inline double sq_dist(const double* a, const double* b, std::size_t n) {
  return active().sq_dist(a, b, n);
}

}  // namespace kernels
}  // namespace zsl

#endif  // ZSL_KERNELS_HPP_
