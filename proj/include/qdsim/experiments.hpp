#pragma once

// Simulated experiments: Rabi, background control, Ramsey and the two-pulse
// SU(2) map, plus the photon-count detection model.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "qdsim/evolve.hpp"
#include "qdsim/interferometer.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::dynamics {

struct CountModel {
  double rep_rate = 80.0;                 // MHz
  double integration_time = 1.7578125;    // s per point (64×128 points span 4 h)
  double efficiency = 1e-3;               // end-to-end detection efficiency
  double background_rate = 200.0;         // counts/s
  double incoherent_slope = 0.0;          // counts/s per μW, off by default
  std::uint64_t rng_seed = 1;
  bool sample = true;                     // draw Poisson counts; false leaves counts = expected

  void validate() const;
  /// Counts per point for unit trion population routed entirely to the detector.
  double signal_scale() const { return rep_rate * 1e6 * integration_time * efficiency; }
  double background_counts() const { return background_rate * integration_time; }
  double expected(double trion_population, double branching_eta, double sqrt_power) const;
};

/// Poisson draw per point keyed on (rng_seed, domain, index); the expected
/// values themselves when sampling is off. Simulators use this for their counts.
std::vector<double> sample_counts(const CountModel& counts, StreamDomain domain, std::span<const double> expected);

struct SimOptions {
  double fwhm = 3.0;       // ps
  double detuning = 0.0;   // rad/ps
  EvolveOptions evolve{};
};

/// One-dimensional power sweep.
struct RabiCurve {
  std::vector<double> sqrt_power;
  std::vector<double> theta;
  std::vector<double> population;  // trion population after the pulse
  std::vector<double> expected;
  std::vector<double> counts;
};

RabiCurve simulate_rabi(std::span<const double> sqrt_power, double kappa, const DecoherenceParams& dec,
                        const CountModel& counts, const SimOptions& opts = {},
                        const DensityMatrix4& initial = randomized_ground_state());

/// Control run without above-band pumping: population starts in the
/// non-driven ground state, except for `leakage` left in the driven one.
RabiCurve simulate_background_control(std::span<const double> sqrt_power, double kappa, const DecoherenceParams& dec,
                                      const CountModel& counts, const SimOptions& opts = {}, double leakage = 0.0);

/// Two-pulse fringe grid, row-major [coarse][fine].
struct RamseyData {
  double theta = 0.0;
  std::vector<double> coarse;  // ps
  std::vector<double> fine;    // fs
  std::vector<double> phase;   // carrier phase of the second pulse, rad
  std::vector<double> population;
  std::vector<double> expected;
  std::vector<double> counts;
};

RamseyData simulate_ramsey(double theta, std::span<const double> coarse_ps, std::span<const double> fine_fs,
                           double lambda_qd, const DecoherenceParams& dec, const CountModel& counts,
                           const SimOptions& opts = {}, const DensityMatrix4& initial = randomized_ground_state());

/// Two equal-area pulses over a power × fine-delay grid, row-major
/// [power][fine], acquired power by power with one integration time per point.
struct Su2Map {
  double coarse = 66.0;
  std::vector<double> sqrt_power;
  std::vector<double> theta;
  std::vector<double> fine;           // nominal fine delay, fs
  std::vector<double> realized_fine;  // including drift, fs
  std::vector<double> phase;          // realized carrier phase, rad
  std::vector<double> timestamps;     // s
  std::vector<double> population;
  std::vector<double> expected;
  std::vector<double> counts;

  interferometer::DelayMap as_delay_map(const std::vector<double>& values) const;
};

Su2Map simulate_su2_map(std::span<const double> sqrt_power, std::span<const double> fine_fs, double coarse_ps,
                        double kappa, double lambda_qd, const DecoherenceParams& dec, const CountModel& counts,
                        const SimOptions& opts = {}, const interferometer::DriftTrace* drift = nullptr,
                        const DensityMatrix4& initial = randomized_ground_state());

}  // namespace qdsim::dynamics
