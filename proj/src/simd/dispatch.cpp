#include <atomic>
#include <cstdlib>
#include <string>

#include "cann/error.hpp"
#include "cann/simd/kernels.hpp"

namespace cann::simd {
namespace {

bool cpu_supports(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return true;
    case Isa::avx2:
#if defined(CANN_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      __builtin_cpu_init();
      return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
      return false;
#endif
    case Isa::neon:
#if defined(CANN_BUILD_NEON)
      return true;  // mandatory on aarch64
#else
      return false;
#endif
  }
  return false;
}

const KernelTable* pick_default() {
  if (const char* env = std::getenv("CANN_SIMD")) {
    const std::string want(env);
    for (Isa isa : {Isa::scalar, Isa::avx2, Isa::neon})
      if (want == isa_name(isa) && isa_available(isa)) return &kernels_for(isa);
  }
  if (isa_available(Isa::avx2)) return &kernels_for(Isa::avx2);
  if (isa_available(Isa::neon)) return &kernels_for(Isa::neon);
  return &detail::kScalarKernels;
}

std::atomic<const KernelTable*>& active() {
  static std::atomic<const KernelTable*> table{pick_default()};
  return table;
}

}  // namespace

std::string_view isa_name(Isa isa) {
  switch (isa) {
    case Isa::scalar:
      return "scalar";
    case Isa::avx2:
      return "avx2";
    case Isa::neon:
      return "neon";
  }
  return "unknown";
}

bool isa_available(Isa isa) { return cpu_supports(isa); }

const KernelTable& kernels_for(Isa isa) {
  if (!isa_available(isa))
    throw Error("SIMD variant '" + std::string(isa_name(isa)) + "' is not available on this CPU");
  switch (isa) {
#if defined(CANN_BUILD_AVX2)
    case Isa::avx2:
      return detail::kAvx2Kernels;
#endif
#if defined(CANN_BUILD_NEON)
    case Isa::neon:
      return detail::kNeonKernels;
#endif
    default:
      return detail::kScalarKernels;
  }
}

const KernelTable& kernels() { return *active().load(std::memory_order_relaxed); }

void set_active_isa(Isa isa) { active().store(&kernels_for(isa), std::memory_order_relaxed); }

}  // namespace cann::simd
