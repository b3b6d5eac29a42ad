#include "qdsim/pulse.hpp"

#include <complex>
#include <string>

#include "qdsim/error.hpp"

namespace qdsim::dynamics {

namespace {
const double kFwhmToSigma = 1.0 / (2.0 * std::sqrt(2.0 * std::log(2.0)));
}

double PulseSpec::sigma() const { return fwhm * kFwhmToSigma; }

void PulseSpec::validate() const {
  if (!(area >= 0.0)) throw DomainError("pulse area must be >= 0");
  if (!(fwhm > 0.0)) throw DomainError("pulse fwhm must be > 0");
  if (!std::isfinite(center) || !std::isfinite(carrier_phase) || !std::isfinite(detuning))
    throw DomainError("pulse parameters must be finite");
}

void PulseSequence::validate() const {
  for (std::size_t i = 0; i < pulses.size(); ++i) {
    pulses[i].validate();
    if (i > 0 && !(pulses[i].center > pulses[i - 1].center))
      throw DomainError("pulse centers must be strictly increasing");
  }
}

void PulseSequence::require_interference_free(double min_gap_fwhm) const {
  for (std::size_t i = 1; i < pulses.size(); ++i) {
    const double gap = pulses[i].center - pulses[i - 1].center;
    const double widest = std::max(pulses[i].fwhm, pulses[i - 1].fwhm);
    if (gap < min_gap_fwhm * widest)
      throw DomainError("overlap: pulse gap " + std::to_string(gap) + " ps is below " +
                        std::to_string(min_gap_fwhm) + " x fwhm");
  }
}

double optical_phase(double delay_fs, double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw DomainError("wavelength must be > 0");
  const double cycles = delay_fs * constants::kSpeedOfLight / lambda_nm;
  double frac = cycles - std::floor(cycles);
  if (frac >= 1.0) frac = 0.0;
  return constants::kTwoPi * frac;
}

PulseSequence two_pulse_sequence(double area, double fwhm, double coarse_ps, double fine_fs,
                                 double lambda_nm, double first_center) {
  PulseSequence seq;
  seq.coarse_delay = coarse_ps;
  seq.fine_delay = fine_fs;
  PulseSpec first{area, fwhm, first_center, 0.0, 0.0};
  PulseSpec second = first;
  second.center = first_center + seq.total_delay_ps();
  second.carrier_phase = optical_phase(coarse_ps * 1e3 + fine_fs, lambda_nm);
  seq.pulses = {first, second};
  return seq;
}

double area_from_sqrt_power(double sqrt_power, double kappa) {
  if (!(sqrt_power >= 0.0)) throw DomainError("sqrt(power) must be >= 0");
  if (!(kappa > 0.0)) throw DomainError("kappa must be > 0");
  return kappa * sqrt_power;
}

GaussianEnvelope::GaussianEnvelope(const PulseSpec& pulse)
    : peak_(0.0), sigma_(pulse.sigma()), center_(pulse.center) {
  pulse.validate();
  peak_ = pulse.area / (sigma_ * std::sqrt(constants::kTwoPi));
}

Eigen::Matrix2cd delta_pulse_propagator(double theta, double phi) {
  using C = std::complex<double>;
  const double c = std::cos(theta / 2);
  const double s = std::sin(theta / 2);
  Eigen::Matrix2cd r;
  // −i s (cos φ σx + sin φ σy) has off-diagonals −i s e^{∓iφ}.
  r(0, 0) = c;
  r(1, 1) = c;
  r(0, 1) = C(0.0, -s) * std::polar(1.0, -phi);
  r(1, 0) = C(0.0, -s) * std::polar(1.0, phi);
  return r;
}

}  // namespace qdsim::dynamics
