// NEON kernel variants for aarch64. Same widen-to-f64 discipline as the
// AVX2 unit; NEON is baseline on aarch64 so no runtime check is needed.

#include "nnklab/simd.hpp"

#include <arm_neon.h>

namespace nnklab::simd {

namespace {

inline double reduce(float64x2_t v) { return vgetq_lane_f64(v, 0) + vgetq_lane_f64(v, 1); }

double l2sq_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t av = vld1q_f32(a + i);
    const float32x4_t bv = vld1q_f32(b + i);
    const float64x2_t alo = vcvt_f64_f32(vget_low_f32(av));
    const float64x2_t ahi = vcvt_f64_f32(vget_high_f32(av));
    const float64x2_t blo = vcvt_f64_f32(vget_low_f32(bv));
    const float64x2_t bhi = vcvt_f64_f32(vget_high_f32(bv));
    const float64x2_t d0 = vsubq_f64(alo, blo);
    const float64x2_t d1 = vsubq_f64(ahi, bhi);
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double s = reduce(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = double(a[i]) - double(b[i]);
    s += d * d;
  }
  return s;
}

double dot_neon(const float* a, const float* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t av = vld1q_f32(a + i);
    const float32x4_t bv = vld1q_f32(b + i);
    acc0 = vfmaq_f64(acc0, vcvt_f64_f32(vget_low_f32(av)), vcvt_f64_f32(vget_low_f32(bv)));
    acc1 = vfmaq_f64(acc1, vcvt_f64_f32(vget_high_f32(av)), vcvt_f64_f32(vget_high_f32(bv)));
  }
  double s = reduce(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += double(a[i]) * double(b[i]);
  return s;
}

double l2sq_mixed_neon(const float* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t av = vld1q_f32(a + i);
    const float64x2_t d0 = vsubq_f64(vcvt_f64_f32(vget_low_f32(av)), vld1q_f64(b + i));
    const float64x2_t d1 = vsubq_f64(vcvt_f64_f32(vget_high_f32(av)), vld1q_f64(b + i + 2));
    acc0 = vfmaq_f64(acc0, d0, d0);
    acc1 = vfmaq_f64(acc1, d1, d1);
  }
  double s = reduce(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) {
    const double d = double(a[i]) - b[i];
    s += d * d;
  }
  return s;
}

void add_to_neon(double* acc, const float* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const float32x4_t xv = vld1q_f32(x + i);
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vcvt_f64_f32(vget_low_f32(xv))));
    vst1q_f64(acc + i + 2, vaddq_f64(vld1q_f64(acc + i + 2), vcvt_f64_f32(vget_high_f32(xv))));
  }
  for (; i < n; ++i) acc[i] += double(x[i]);
}

const Kernels kNeon{"neon", l2sq_neon, dot_neon, l2sq_mixed_neon, add_to_neon};

}  // namespace

const Kernels* neon_kernels() { return &kNeon; }

}  // namespace nnklab::simd
