#pragma once

#include <Eigen/Core>
#include <cmath>
#include <vector>

#include "qdsim/constants.hpp"

namespace qdsim::dynamics {

/// Transform-limited Gaussian pulse, described in the rotating frame of the
/// driven transition.
struct PulseSpec {
  double area = constants::kPi;  // θ, rad
  double fwhm = 3.0;             // intensity-envelope FWHM of Ω(t), ps
  double center = 0.0;           // ps
  double carrier_phase = 0.0;    // φ, rad
  double detuning = 0.0;         // rad/ps

  double sigma() const;
  void validate() const;
};

struct PulseSequence {
  std::vector<PulseSpec> pulses;
  double coarse_delay = 0.0;  // τ_c, ps
  double fine_delay = 0.0;    // τ_f, fs

  double total_delay_ps() const { return coarse_delay + fine_delay * 1e-3; }
  /// Centers strictly increasing and every pulse valid.
  void validate() const;
  /// Throws DomainError("overlap") unless every gap is at least `min_gap_fwhm` FWHMs.
  void require_interference_free(double min_gap_fwhm = 5.0) const;
};

/// Carrier phase accumulated by the optical field over `delay_fs` at wavelength `lambda_nm`,
/// reduced to [0, 2π).
double optical_phase(double delay_fs, double lambda_nm);

/// Two identical pulses separated by τ_c + τ_f; the second carries phase ω_L·τ.
PulseSequence two_pulse_sequence(double area, double fwhm, double coarse_ps, double fine_fs,
                                 double lambda_nm, double first_center = 0.0);

/// θ = kappa·sqrt(P). Both inputs must be non-negative, kappa strictly positive.
double area_from_sqrt_power(double sqrt_power, double kappa);

/// Ω(t) = Ω0 exp(−(t−t0)²/(2σ²)) with ∫Ω dt = θ.
class GaussianEnvelope {
 public:
  explicit GaussianEnvelope(const PulseSpec& pulse);

  double operator()(double t) const {
    const double x = (t - center_) / sigma_;
    return peak_ * std::exp(-0.5 * x * x);
  }
  /// Ω at `u` ps from the pulse center.
  double at_offset(double u) const {
    const double x = u / sigma_;
    return peak_ * std::exp(-0.5 * x * x);
  }
  double peak() const { return peak_; }
  double sigma() const { return sigma_; }
  double center() const { return center_; }

 private:
  double peak_;
  double sigma_;
  double center_;
};

/// R(θ, φ) = cos(θ/2) I − i sin(θ/2)(cos φ σx + sin φ σy) on the (ground, trion)
/// basis of the driven leg.
Eigen::Matrix2cd delta_pulse_propagator(double theta, double phi);

}  // namespace qdsim::dynamics
