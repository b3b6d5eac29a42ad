#pragma once

// Rotating quarter-wave-plate polarimetry: a quarter-wave retarder at angle
// α followed by a horizontal linear polarizer.

#include <span>
#include <vector>

#include "qdsim/stokes.hpp"

namespace qdsim::analysis {

/// I(α) = ½[S0 + S1 cos²2α + S2 sin2α cos2α − S3 sin2α].
std::vector<double> polarimetry_simulate(const StokesVector& s, std::span<const double> alphas);

struct PolarimetryResult {
  StokesVector stokes;
  double docp = 0.0;
};

/// Fourier analysis of ≥ 16 uniformly spaced samples covering [α0, α0 + 2π).
/// Throws DomainError for non-uniform or incomplete grids.
PolarimetryResult polarimetry_extract(std::span<const double> alphas, std::span<const double> intensity);

/// N uniformly spaced angles over [0, 2π).
std::vector<double> uniform_angles(std::size_t n);

}  // namespace qdsim::analysis
