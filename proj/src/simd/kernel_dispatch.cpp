#include <cstdlib>
#include <string>

#include "qdsim/error.hpp"
#include "qdsim/simd/lindblad_kernel.hpp"

namespace qdsim::simd {

bool isa_available(KernelIsa isa) {
  switch (isa) {
    case KernelIsa::Scalar:
      return true;
    case KernelIsa::Avx2:
#if defined(QDSIM_BUILD_AVX2) && (defined(__GNUC__) || defined(__clang__))
      return __builtin_cpu_supports("avx2");
#else
      return false;
#endif
  }
  return false;
}

WindowKernel kernel_for(KernelIsa isa) {
  if (!isa_available(isa)) throw DomainError("kernel ISA unavailable: " + std::string(isa_name(isa)));
  switch (isa) {
    case KernelIsa::Scalar:
      return &integrate_window_scalar;
    case KernelIsa::Avx2:
#if defined(QDSIM_BUILD_AVX2)
      return &integrate_window_avx2;
#else
      break;
#endif
  }
  return &integrate_window_scalar;
}

namespace {
KernelIsa resolve_isa() {
  if (const char* env = std::getenv("QDSIM_SIMD")) {
    const std::string want(env);
    if (want == "scalar") return KernelIsa::Scalar;
    if (want == "avx2" && isa_available(KernelIsa::Avx2)) return KernelIsa::Avx2;
  }
  return isa_available(KernelIsa::Avx2) ? KernelIsa::Avx2 : KernelIsa::Scalar;
}
}  // namespace

KernelIsa active_isa() {
  static const KernelIsa isa = resolve_isa();
  return isa;
}

std::string_view isa_name(KernelIsa isa) {
  return isa == KernelIsa::Avx2 ? "avx2" : "scalar";
}

}  // namespace qdsim::simd
