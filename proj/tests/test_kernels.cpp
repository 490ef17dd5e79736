#include <doctest.h>

#include <cmath>
#include <vector>

#include "zsl/kernels.hpp"
#include "zsl/rng.hpp"
#include "test_util.hpp"

using namespace zsl;

namespace {

const std::vector<std::size_t> kSizes = {0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 63, 64, 255, 1000};

void check_backend_pair(const kernels::Backend& ref, const kernels::Backend& other) {
  Rng rng(314159);
  for (std::size_t n : kSizes) {
    std::vector<double> a = zsl_test::random_vector(rng, n, -3.0, 3.0);
    std::vector<double> b = zsl_test::random_vector(rng, n, -3.0, 3.0);

    // Reductions: reassociation tolerance only.
    CHECK(zsl_test::rel_err(ref.dot(a.data(), b.data(), n), other.dot(a.data(), b.data(), n)) <
          1e-12);
    CHECK(zsl_test::rel_err(ref.sum(a.data(), n), other.sum(a.data(), n)) < 1e-12);
    CHECK(zsl_test::rel_err(ref.sq_dist(a.data(), b.data(), n),
                            other.sq_dist(a.data(), b.data(), n)) < 1e-12);

    // Elementwise ops round once per element in every backend: bit-exact.
    std::vector<double> y1 = b;
    std::vector<double> y2 = b;
    ref.axpy(1.7, a.data(), y1.data(), n);
    other.axpy(1.7, a.data(), y2.data(), n);
    CHECK(y1 == y2);

    std::vector<double> s1 = a;
    std::vector<double> s2 = a;
    ref.scale(-0.37, s1.data(), n);
    other.scale(-0.37, s2.data(), n);
    CHECK(s1 == s2);

    std::vector<double> h1(n);
    std::vector<double> h2(n);
    ref.hadamard(a.data(), b.data(), h1.data(), n);
    other.hadamard(a.data(), b.data(), h2.data(), n);
    CHECK(h1 == h2);
  }
}

}  // namespace

TEST_CASE("scalar kernels compute the expected quantities") {
  const auto& k = kernels::scalar_backend();
  const std::vector<double> a = {1.0, 2.0, 3.0};
  const std::vector<double> b = {4.0, -5.0, 6.0};
  CHECK(k.dot(a.data(), b.data(), 3) == doctest::Approx(12.0));
  CHECK(k.sum(a.data(), 3) == doctest::Approx(6.0));
  CHECK(k.sq_dist(a.data(), b.data(), 3) == doctest::Approx(9.0 + 49.0 + 9.0));

  std::vector<double> y = b;
  k.axpy(2.0, a.data(), y.data(), 3);
  CHECK(y == std::vector<double>{6.0, -1.0, 12.0});

  std::vector<double> out(3);
  k.hadamard(a.data(), b.data(), out.data(), 3);
  CHECK(out == std::vector<double>{4.0, -10.0, 18.0});

  k.scale(0.5, out.data(), 3);
  CHECK(out == std::vector<double>{2.0, -5.0, 9.0});

  CHECK(k.dot(a.data(), b.data(), 0) == 0.0);
  CHECK(k.sum(a.data(), 0) == 0.0);
}

TEST_CASE("avx2 backend matches the scalar reference") {
  if (!kernels::avx2_available()) return;  // nothing to compare on this host
  check_backend_pair(kernels::scalar_backend(), *kernels::avx2_backend());
}

TEST_CASE("dispatched backend is one of the known implementations") {
  const auto& active = kernels::active();
  const bool is_scalar = active.dot == kernels::scalar_backend().dot;
  const bool is_avx2 =
      kernels::avx2_backend() != nullptr && active.dot == kernels::avx2_backend()->dot;
  CHECK((is_scalar || is_avx2));
  if (kernels::avx2_available()) CHECK(is_avx2);
  check_backend_pair(kernels::scalar_backend(), active);
}
