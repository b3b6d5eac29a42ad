#pragma once

// Batched RK4 integration of the four-level Lindblad equation over one drive
// window. Each lane is an independent density matrix; lanes share the time
// step and decoherence rates but carry their own sampled drive.
//
// Lane state layout: 16 real parts followed by 16 imaginary parts, row-major
// over the basis {g−, g+, t−, t+}.

#include <array>
#include <cstddef>
#include <string_view>

namespace qdsim::simd {

inline constexpr std::size_t kBatch = 4;
inline constexpr std::size_t kLaneDoubles = 32;

using LaneState = std::array<double, kLaneDoubles>;

/// Lane-uniform rates (all in 1/ps or rad/ps).
struct LindbladRates {
  double decay_vertical = 0.0;  // t± → g±
  double decay_cross = 0.0;     // t± → g∓
  double gamma_phi = 0.0;       // constant ground–trion dephasing
  double eid_coeff = 0.0;       // A in A·Ω(t)², ps
  double trion_energy = 0.0;    // H[t−,t−] in the rotating frame (= −detuning)
};

/// Drive coefficient h(t) = H[g−,t−] sampled at half-step nodes. Node k of
/// lane l lives at index k*kBatch + l; a window of n steps uses nodes
/// first_node .. first_node + 2n.
struct DriveBlock {
  const double* h_re = nullptr;
  const double* h_im = nullptr;
  std::size_t first_node = 0;
  std::size_t n_steps = 0;
  double dt = 0.0;
  std::size_t active_lanes = kBatch;  // scalar kernel skips lanes beyond this
};

enum class KernelIsa { Scalar, Avx2 };

using WindowKernel = void (*)(std::array<LaneState, kBatch>& lanes, const DriveBlock& drive,
                              const LindbladRates& rates);

void integrate_window_scalar(std::array<LaneState, kBatch>& lanes, const DriveBlock& drive,
                             const LindbladRates& rates);
#if defined(QDSIM_BUILD_AVX2)
void integrate_window_avx2(std::array<LaneState, kBatch>& lanes, const DriveBlock& drive,
                           const LindbladRates& rates);
#endif

/// True when the running CPU supports `isa` and it was compiled in.
bool isa_available(KernelIsa isa);

/// Kernel for `isa`; throws DomainError when unavailable.
WindowKernel kernel_for(KernelIsa isa);

/// Best available ISA, overridable with QDSIM_SIMD=scalar|avx2. Resolved once.
KernelIsa active_isa();
std::string_view isa_name(KernelIsa isa);

}  // namespace qdsim::simd
