#include "cann/simd/kernels.hpp"

namespace cann::simd {
namespace {

void accumulate_squared_diff_scalar(double* acc, const double* src, double q, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double d = src[i] - q;
    acc[i] += d * d;
  }
}

void axpy_scalar(double* y, const double* x, double a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}

double dot_scalar(const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += x[i] * y[i];
  return s;
}

double weighted_dot_scalar(const double* w, const double* x, const double* y, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * x[i] * y[i];
  return s;
}

}  // namespace

namespace detail {
const KernelTable kScalarKernels{Isa::scalar, accumulate_squared_diff_scalar, axpy_scalar,
                                 dot_scalar, weighted_dot_scalar};
}

}  // namespace cann::simd
