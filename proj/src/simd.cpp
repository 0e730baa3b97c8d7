#include "nnklab/simd.hpp"

#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <string>

namespace nnklab::simd {

namespace {

double l2sq_scalar(const float* a, const float* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

double dot_scalar(const float* a, const float* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += double(a[i]) * double(b[i]);
  return s;
}

double l2sq_mixed_scalar(const float* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = double(a[i]) - b[i];
    s += d * d;
  }
  return s;
}

void add_to_scalar(double* acc, const float* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) acc[i] += double(x[i]);
}

const Kernels kScalar{"scalar", l2sq_scalar, dot_scalar, l2sq_mixed_scalar, add_to_scalar};

const Kernels& select() {
  const char* env = std::getenv("NNKLAB_SIMD");
  const std::string want = env ? env : "auto";
  if (want == "scalar") return kScalar;
  if (want == "avx2") {
    const Kernels* k = avx2_kernels();
    if (!k || !cpu_supports_avx2())
      throw std::runtime_error("NNKLAB_SIMD=avx2 requested but AVX2 is not usable on this host");
    return *k;
  }
  if (want == "neon") {
    const Kernels* k = neon_kernels();
    if (!k) throw std::runtime_error("NNKLAB_SIMD=neon requested but this build has no NEON kernels");
    return *k;
  }
  if (const Kernels* k = avx2_kernels(); k && cpu_supports_avx2()) return *k;
  if (const Kernels* k = neon_kernels()) return *k;
  return kScalar;
}

}  // namespace

const Kernels& scalar_kernels() { return kScalar; }

bool cpu_supports_avx2() {
#if defined(__x86_64__) || defined(__i386__)
  return __builtin_cpu_supports("avx2");
#else
  return false;
#endif
}

#if !defined(NNKLAB_HAVE_AVX2)
const Kernels* avx2_kernels() { return nullptr; }
#endif
#if !defined(NNKLAB_HAVE_NEON)
const Kernels* neon_kernels() { return nullptr; }
#endif

const Kernels& active() {
  static const Kernels& chosen = select();
  return chosen;
}

}  // namespace nnklab::simd
