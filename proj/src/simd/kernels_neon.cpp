// Elementwise kernels avoid fused multiply-add to round like the scalar code.

#include <arm_neon.h>

#include "cann/simd/kernels.hpp"

namespace cann::simd {
namespace {

void accumulate_squared_diff_neon(double* acc, const double* src, double q, std::size_t n) {
  const float64x2_t vq = vdupq_n_f64(q);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(src + i), vq);
    vst1q_f64(acc + i, vaddq_f64(vld1q_f64(acc + i), vmulq_f64(d, d)));
  }
  for (; i < n; ++i) {
    const double d = src[i] - q;
    acc[i] += d * d;
  }
}

void axpy_neon(double* y, const double* x, double a, std::size_t n) {
  const float64x2_t va = vdupq_n_f64(a);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(y + i, vaddq_f64(vld1q_f64(y + i), vmulq_f64(va, vld1q_f64(x + i))));
  for (; i < n; ++i) y[i] += a * x[i];
}

double dot_neon(const double* x, const double* y, std::size_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) s = vfmaq_f64(s, vld1q_f64(x + i), vld1q_f64(y + i));
  double r = vaddvq_f64(s);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}

double weighted_dot_neon(const double* w, const double* x, const double* y, std::size_t n) {
  float64x2_t s = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    s = vfmaq_f64(s, vmulq_f64(vld1q_f64(w + i), vld1q_f64(x + i)), vld1q_f64(y + i));
  double r = vaddvq_f64(s);
  for (; i < n; ++i) r += w[i] * x[i] * y[i];
  return r;
}

}  // namespace

namespace detail {
const KernelTable kNeonKernels{Isa::neon, accumulate_squared_diff_neon, axpy_neon, dot_neon,
                               weighted_dot_neon};
}

}  // namespace cann::simd
