#include <cstdlib>
#include <cstring>

#include "zsl/kernels.hpp"
#include "zsl/log.hpp"

namespace zsl {
namespace kernels {

#ifndef ZSL_HAVE_AVX2
const Backend* avx2_backend() { return nullptr; }
#endif

bool avx2_available() {
#ifdef ZSL_HAVE_AVX2
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

namespace {

const Backend& select() {
  const char* force = std::getenv("ZSL_KERNELS");
  if (force != nullptr) {
    if (std::strcmp(force, "scalar") == 0) return scalar_backend();
    if (std::strcmp(force, "avx2") == 0) {
      if (avx2_available()) return *avx2_backend();
      log::error("ZSL_KERNELS=avx2 requested but unavailable, using scalar");
      return scalar_backend();
    }
    log::error(std::string("unknown ZSL_KERNELS value '") + force + "', using auto selection");
  }
  if (avx2_available()) return *avx2_backend();
  return scalar_backend();
}

}  // namespace

const Backend& active() {
  static const Backend& backend = select();
  return backend;
}

}  // namespace kernels
}  // namespace zsl
