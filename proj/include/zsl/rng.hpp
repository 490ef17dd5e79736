#ifndef ZSL_RNG_HPP_
#define ZSL_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace zsl {

// Seeded generator with hand-rolled draws. mt19937_64 output is pinned by the
// standard; rolling the distributions ourselves keeps streams identical across
// standard-library implementations too.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform01() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // Uniform in [0, n), rejection-sampled so every value is equally likely.
  std::uint64_t uniform_int(std::uint64_t n) {
    const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
    for (;;) {
      const std::uint64_t r = gen_();
      if (r >= threshold) return (r - threshold) % n;
    }
  }

  // Standard normal via Box-Muller; one draw per call, no cached state.
  double normal() {
    double u1 = uniform01();
    if (u1 < 1e-300) u1 = 1e-300;
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 gen_;
};

}  // namespace zsl

#endif  // ZSL_RNG_HPP_
