#pragma once

#include <array>
#include <span>
#include <vector>

#include "qdsim/least_squares.hpp"

namespace qdsim::analysis {

/// y = offset + amplitude·cos(2πτ/period + phase); contrast = amplitude/offset.
struct FringeFit {
  double amplitude = 0.0;
  double period = 0.0;
  double phase = 0.0;
  double offset = 0.0;
  double contrast = 0.0;
  double contrast_sigma = 0.0;
  double fourier_snr = 0.0;
  FitReport report;
};

inline constexpr double kMinFourierSnr = 3.0;

/// Throws NumericError("no oscillation") when the dominant Fourier peak has SNR < 3.
FringeFit fit_fringe(std::span<const double> delay, std::span<const double> counts);

/// C(τ) = C0·exp(−τ/T2*). Non-decaying data yields T2* = +inf and the
/// "non_decaying" flag.
struct ContrastDecayFit {
  double c0 = 0.0;
  double t2_star = 0.0;
  double t2_star_sigma = 0.0;
  FitReport report;
};

ContrastDecayFit fit_contrast_decay(std::span<const double> delay, std::span<const double> contrast);

/// y = offset + slope·P + (C/2)(1 − exp(−d·θ²)·cos θ), θ = kappa·√P, P = (√P)².
struct RabiFit {
  double kappa = 0.0;
  double contrast = 0.0;
  double damping = 0.0;
  double offset = 0.0;
  double slope = 0.0;
  double pi_power = 0.0;        // (π/kappa)², μW
  double pi_sqrt_power = 0.0;   // π/kappa
  bool oscillating = true;
  FitReport report;
};

double rabi_model(double sqrt_power, double kappa, double contrast, double damping, double offset, double slope);
RabiFit fit_rabi(std::span<const double> sqrt_power, std::span<const double> counts);

/// Four line energies (any order) measured at one field.
struct FanPoint {
  double b = 0.0;
  std::array<double, 4> energies{};
};

struct ZeemanFit {
  double e0 = 0.0;
  double gamma = 0.0;
  double g_e = 0.0;
  double g_h = 0.0;
  FitReport report;
};

/// Linear least squares on E = E0 + γB² + (s_e g_e + s_h g_h)μ_B B/2 with
/// branches assigned by energy order (convention g_h > g_e > 0). Throws
/// NumericError when fewer than 3 distinct fields are given.
ZeemanFit fit_zeeman_fan(std::span<const FanPoint> points);

enum class PointFlag { Ok, Boundary, Negative };

struct CorrectedCurve {
  std::vector<double> x;
  std::vector<double> y;
  std::vector<PointFlag> flags;
};

/// Pointwise signal − background; negative values are kept and flagged.
CorrectedCurve subtract_background(std::span<const double> x_signal, std::span<const double> signal,
                                   std::span<const double> x_background, std::span<const double> background);

}  // namespace qdsim::analysis
