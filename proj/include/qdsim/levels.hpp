#pragma once

// Magneto-optical level structure of the positively charged trion in a
// Faraday-configuration field: four transition lines forming a double-Λ.

#include <array>
#include <span>

#include "qdsim/constants.hpp"
#include "qdsim/stokes.hpp"

namespace qdsim::levels {

struct MagnetoParams {
  double e0 = 0.0;        // zero-field transition energy, μeV
  double gamma = 16.0;    // diamagnetic coefficient, μeV/T²
  double g_e = 0.54;      // effective electron g-factor
  double g_h = 0.94;      // effective hole g-factor
  static constexpr double mu_b = constants::kBohrMagneton;

  void validate() const;
};

enum class LineRole { Other, Driven, Detected };

struct TransitionLine {
  int s_e = 1;   // electron-branch sign
  int s_h = 1;   // hole-branch sign
  double energy = 0.0;  // μeV
  StokesVector stokes{};
  LineRole role = LineRole::Other;
};

using LineSet = std::array<TransitionLine, 4>;

struct HoleMixing {
  double chi = constants::kPi / 2;
  double c1 = 0.0;
  double c2 = 0.0;
};

/// Energy of the (s_e, s_h) branch at field `b` (tesla).
double line_energy(const MagnetoParams& p, double b, int s_e, int s_h);

/// All four lines at field `b`, sorted by ascending energy. Throws DomainError for b < 0.
LineSet transition_energies(const MagnetoParams& p, double b);

/// c1 = cos(chi/2), c2 = sin(chi/2). chi must lie in [0, π].
HoleMixing hole_mixing(double chi);

/// Ideal cross-circular Stokes vectors, one per branch in the canonical order
/// (s_e, s_h) = (−,−), (−,+), (+,−), (+,+). Lines sharing a trion state
/// (same s_e) carry opposite-sign S3 = ±docp.
std::array<StokesVector, 4> line_polarizations(const HoleMixing& mixing, double docp);

/// Writes the matching Stokes vector into each line.
void apply_polarizations(LineSet& lines, const HoleMixing& mixing, double docp);

inline constexpr double kRoleEpsilon = 1e-9;  // μeV

/// Lowest line → Driven, upper member of the inner pair → Detected. The
/// result is sorted ascending and independent of input order. Throws
/// NumericError when any two lines are closer than `epsilon`.
LineSet assign_roles(LineSet lines, double epsilon = kRoleEpsilon);

struct ResolvabilityVerdict {
  bool pass = false;
  double min_separation = 0.0;  // μeV
};

/// Minimum distance from the Driven and Detected lines to every other line,
/// compared against the spectrometer resolution.
ResolvabilityVerdict resolvability_check(const LineSet& lines, double resolution);

}  // namespace qdsim::levels
