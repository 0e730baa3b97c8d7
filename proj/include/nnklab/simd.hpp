#pragma once
// Runtime-dispatched kernels for the float32 inner loops (distances, dot
// products, centroid accumulation). The scalar implementations are the
// reference; vector variants accumulate in float64 with the same
// convert-then-subtract order, so they agree with scalar up to summation
// reassociation (see tests/test_simd.cpp for the equivalence suite).

#include <cstddef>

namespace nnklab::simd {

struct Kernels {
  const char* name;
  // squared Euclidean distance between two f32 vectors
  double (*l2sq)(const float* a, const float* b, std::size_t n);
  // dot product of two f32 vectors
  double (*dot)(const float* a, const float* b, std::size_t n);
  // squared Euclidean distance, f32 vector vs f64 vector (centroids)
  double (*l2sq_mixed)(const float* a, const double* b, std::size_t n);
  // acc[i] += x[i], f32 into f64 accumulator
  void (*add_to)(double* acc, const float* x, std::size_t n);
};

const Kernels& scalar_kernels();

// Compiled-in vector variants; nullptr when the build does not include them.
const Kernels* avx2_kernels();
const Kernels* neon_kernels();

// True when the running CPU can execute AVX2 code.
bool cpu_supports_avx2();

// Best usable implementation, selected once per process. The environment
// variable NNKLAB_SIMD=scalar|avx2|neon|auto overrides the choice.
const Kernels& active();

inline double l2sq(const float* a, const float* b, std::size_t n) { return active().l2sq(a, b, n); }
inline double dot(const float* a, const float* b, std::size_t n) { return active().dot(a, b, n); }
inline double l2sq_mixed(const float* a, const double* b, std::size_t n) { return active().l2sq_mixed(a, b, n); }
inline void add_to(double* acc, const float* x, std::size_t n) { active().add_to(acc, x, n); }

}  // namespace nnklab::simd
