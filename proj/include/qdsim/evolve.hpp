#pragma once

#include <cstddef>
#include <limits>
#include <mutex>
#include <span>
#include <vector>

#include "qdsim/density_matrix.hpp"
#include "qdsim/pulse.hpp"
#include "qdsim/simd/lindblad_kernel.hpp"

namespace qdsim::dynamics {

struct DecoherenceParams {
  double t1 = 1000.0;              // trion lifetime, ps (may be +inf)
  double branching_eta = 0.5;      // fraction of trion decay into the Detected (cross) leg
  double gamma_phi = 1.0 / 51.0 - 1.0 / 2000.0;  // pure dephasing, 1/ps
  double eid_coeff = 0.02;         // excitation-induced dephasing A, ps

  void validate() const;
  double decay_rate() const { return 1.0 / t1; }
  /// Pure dephasing that makes the ground–trion coherence decay at 1/T2*.
  static double gamma_phi_for(double t2_star, double t1);
  /// All decoherence off: T1 = ∞, γ_φ = 0, A = 0.
  static DecoherenceParams coherent();
  simd::LindbladRates rates(double detuning) const;
};

/// Worst trace and positivity drift over every checked state; thread-safe.
class InvariantMonitor {
 public:
  void record(const DensityMatrix4::Check& c);
  double max_trace_error() const;
  double min_eigenvalue() const;
  std::size_t states() const;

 private:
  mutable std::mutex mutex_;
  double max_trace_error_ = 0.0;
  double min_eigenvalue_ = std::numeric_limits<double>::infinity();
  std::size_t states_ = 0;
};

struct EvolveOptions {
  double dt = 0.005;             // ps, upper bound; windows use an equal subdivision
  double window_sigmas = 6.0;    // drive integrated over center ± window_sigmas·σ
  std::size_t trajectory_stride = 0;  // record every N steps inside windows; 0 disables
  bool check_invariants = true;
  simd::KernelIsa isa = simd::active_isa();
  InvariantMonitor* monitor = nullptr;  // receives every window-end check
};

struct TrajectoryPoint {
  double t;
  DensityMatrix4 rho;
};

struct EvolveResult {
  DensityMatrix4 rho;
  std::vector<TrajectoryPoint> trajectory;
};

/// Exact map for field-free evolution over `duration` ps.
DensityMatrix4 free_evolution(const DensityMatrix4& rho, double duration, const DecoherenceParams& dec,
                              double detuning = 0.0);

/// Integrates the Lindblad equation across every pulse window with RK4 and
/// bridges the gaps with the exact free map. Returns the state at the end of
/// the last pulse window. Throws DomainError when dt exceeds fwhm/50 and
/// NumericError when trace or positivity drift beyond 1e-6.
DensityMatrix4 evolve(const DensityMatrix4& rho0, const PulseSequence& seq, const DecoherenceParams& dec,
                      double dt = 0.005);
EvolveResult evolve_traced(const DensityMatrix4& rho0, const PulseSequence& seq, const DecoherenceParams& dec,
                           const EvolveOptions& opts);

/// Evolves many independent points, packing compatible ones into SIMD lanes.
/// Per-point results do not depend on the batching.
std::vector<DensityMatrix4> evolve_batch(std::span<const DensityMatrix4> rho0, std::span<const PulseSequence> seqs,
                                         const DecoherenceParams& dec, const EvolveOptions& opts);

}  // namespace qdsim::dynamics
