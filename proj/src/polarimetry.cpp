#include "qdsim/polarimetry.hpp"

#include <cmath>

#include "qdsim/constants.hpp"
#include "qdsim/error.hpp"

namespace qdsim::analysis {

std::vector<double> polarimetry_simulate(const StokesVector& s, std::span<const double> alphas) {
  if (!s.physical(1e-12)) throw DomainError("polarimetry_simulate: Stokes vector is not physical");
  std::vector<double> out;
  out.reserve(alphas.size());
  for (double a : alphas) {
    const double c2 = std::cos(2 * a);
    const double s2 = std::sin(2 * a);
    out.push_back(0.5 * (s.s0 + s.s1 * c2 * c2 + s.s2 * s2 * c2 - s.s3 * s2));
  }
  return out;
}

std::vector<double> uniform_angles(std::size_t n) {
  std::vector<double> out(n);
  for (std::size_t k = 0; k < n; ++k) out[k] = constants::kTwoPi * static_cast<double>(k) / static_cast<double>(n);
  return out;
}

PolarimetryResult polarimetry_extract(std::span<const double> alphas, std::span<const double> intensity) {
  const std::size_t n = alphas.size();
  if (n != intensity.size()) throw DomainError("polarimetry_extract: length mismatch");
  if (n < 16) throw DomainError("grid: polarimetry needs at least 16 angles");
  const double step = constants::kTwoPi / static_cast<double>(n);
  for (std::size_t k = 1; k < n; ++k) {
    if (std::abs((alphas[k] - alphas[k - 1]) - step) > 1e-9)
      throw DomainError("grid: polarimetry angles must be uniform over one full turn");
  }
  double dc = 0, a4 = 0, b4 = 0, b2 = 0;
  for (std::size_t k = 0; k < n; ++k) {
    dc += intensity[k];
    a4 += intensity[k] * std::cos(4 * alphas[k]);
    b4 += intensity[k] * std::sin(4 * alphas[k]);
    b2 += intensity[k] * std::sin(2 * alphas[k]);
  }
  const double nn = static_cast<double>(n);
  dc /= nn;
  a4 *= 2.0 / nn;
  b4 *= 2.0 / nn;
  b2 *= 2.0 / nn;
  PolarimetryResult out;
  out.stokes.s1 = 4.0 * a4;
  out.stokes.s2 = 4.0 * b4;
  out.stokes.s3 = -2.0 * b2;
  out.stokes.s0 = 2.0 * dc - out.stokes.s1 / 2.0;
  if (!(out.stokes.s0 > 0.0)) throw DomainError("polarimetry_extract: non-positive total intensity");
  out.docp = out.stokes.docp();
  return out;
}

}  // namespace qdsim::analysis
