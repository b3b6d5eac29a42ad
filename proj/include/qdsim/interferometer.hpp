#pragma once

// Mach-Zehnder delay line: delay schedules, synthetic path-length drift, the
// HeNe phase reference and drift correction of two-pulse maps.

#include <cstdint>
#include <span>
#include <vector>

#include "qdsim/constants.hpp"

namespace qdsim::interferometer {

struct DelaySchedule {
  double coarse_start = 66.7;  // ps
  double coarse_step = 3.33;   // ps
  std::size_t n_coarse = 21;
  double fine_span = 12.0;     // fs
  std::size_t n_fine = 64;

  void validate() const;
  std::vector<double> coarse_delays() const;
  /// n_fine points from 0 to fine_span inclusive.
  std::vector<double> fine_delays() const;
};

struct DriftTrace {
  std::vector<double> timestamps;  // s
  std::vector<double> path_drift;  // nm
  std::uint64_t seed = 0;

  void validate() const;
  /// Linear interpolation of the path drift; throws DomainError outside the trace.
  double at(double t) const;
};

struct HeNeTrace {
  std::vector<double> timestamps;     // s
  std::vector<double> wrapped_phase;  // rad in (−π, π]
};

/// Wraps into (−π, π].
double wrap_phase(double x);

/// ΔL(t) = linear·t + Wiener path with per-step variance sigma_rw²·Δt, sampled
/// at n_samples uniform times over [0, duration].
DriftTrace generate_drift(double duration, std::size_t n_samples, double sigma_rw, double linear, std::uint64_t seed);

/// φ(t) = wrap(sign·2π·ΔL(t)/λ). `sign` selects the HeNe propagation convention.
HeNeTrace hene_wrapped_phase(const DriftTrace& drift, double lambda_hene = constants::kHeNeWavelength,
                             int sign = 1);

/// Restores continuity by adding multiples of 2π wherever consecutive samples
/// jump by more than π. Requires true sample-to-sample changes below π; a
/// violation cannot be detected.
std::vector<double> unwrap_phase(std::span<const double> wrapped);

/// Δτ = φ·λ/(2πc) in fs.
std::vector<double> drift_to_delay(std::span<const double> unwrapped, double lambda_hene = constants::kHeNeWavelength);
double drift_to_delay(double unwrapped, double lambda_hene = constants::kHeNeWavelength);

/// Fringe period of light at `lambda_nm`, fs.
double fringe_period_fs(double lambda_nm);

/// A power × fine-delay grid with per-point acquisition times. Missing
/// values are NaN.
struct DelayMap {
  std::vector<double> sqrt_power;  // rows
  std::vector<double> fine_delay;  // columns, fs, strictly increasing
  std::vector<double> values;      // row-major [power][fine]
  std::vector<double> timestamps;  // s, same layout as values
  std::size_t rows() const { return sqrt_power.size(); }
  std::size_t cols() const { return fine_delay.size(); }
  double& at(std::size_t r, std::size_t c) { return values[r * cols() + c]; }
  double at(std::size_t r, std::size_t c) const { return values[r * cols() + c]; }
};

struct CorrectionResult {
  DelayMap map;             // values on the target axis
  std::size_t n_missing = 0;
  std::vector<double> realized_delay;  // fs, raw layout
};

/// Moves each sample to its realized delay (nominal + Δτ at its timestamp,
/// Δτ from the unwrapped HeNe phase) and re-grids each power row onto
/// `target_axis` by linear interpolation. Points outside a row's realized
/// range are NaN. Throws DomainError when the HeNe trace does not cover
/// every timestamp. A positive `fold_period_fs` (the QD fringe period) fills
/// targets outside a row's realized range from the phase-equivalent delay
/// x + m·period inside it.
CorrectionResult correct_su2_map(const DelayMap& raw, const HeNeTrace& hene, std::span<const double> target_axis,
                                 double lambda_hene = constants::kHeNeWavelength, int sign = 1,
                                 double fold_period_fs = 0.0);

}  // namespace qdsim::interferometer
