#pragma once

// Data-parallel inner loops shared by the neighbour search and the saddle
// solver. Every kernel has a scalar reference implementation; vector variants
// are selected once at startup from the CPU's reported features.

#include <cstddef>
#include <span>
#include <string_view>

namespace cann::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;
  // acc[i] += (src[i] - q)^2
  void (*accumulate_squared_diff)(double* acc, const double* src, double q, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double* y, const double* x, double a, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  // sum_i w[i] * x[i] * y[i]
  double (*weighted_dot)(const double* w, const double* x, const double* y, std::size_t n);
};

std::string_view isa_name(Isa isa);

/// True when the variant was compiled in and the running CPU supports it.
bool isa_available(Isa isa);

/// Table for a specific ISA; throws cann::Error when unavailable.
const KernelTable& kernels_for(Isa isa);

/// The active table. Chosen on first use: the widest available ISA, unless the
/// CANN_SIMD environment variable names another one ("scalar", "avx2", "neon").
const KernelTable& kernels();

/// Overrides the active table (tests, benchmarking). Not thread-safe with
/// concurrent kernel calls.
void set_active_isa(Isa isa);

inline void accumulate_squared_diff(std::span<double> acc, std::span<const double> src, double q) {
  kernels().accumulate_squared_diff(acc.data(), src.data(), q, acc.size());
}
inline void axpy(std::span<double> y, std::span<const double> x, double a) {
  kernels().axpy(y.data(), x.data(), a, y.size());
}
inline double dot(std::span<const double> x, std::span<const double> y) {
  return kernels().dot(x.data(), y.data(), x.size());
}
inline double weighted_dot(std::span<const double> w, std::span<const double> x,
                           std::span<const double> y) {
  return kernels().weighted_dot(w.data(), x.data(), y.data(), w.size());
}

namespace detail {
extern const KernelTable kScalarKernels;
#if defined(CANN_BUILD_AVX2)
extern const KernelTable kAvx2Kernels;
#endif
#if defined(CANN_BUILD_NEON)
extern const KernelTable kNeonKernels;
#endif
}  // namespace detail

}  // namespace cann::simd
