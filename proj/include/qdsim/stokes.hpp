#pragma once

#include <cmath>

namespace qdsim {

/// Stokes vector (S0, S1, S2, S3), intensity-normalized where noted.
struct StokesVector {
  double s0 = 1.0;
  double s1 = 0.0;
  double s2 = 0.0;
  double s3 = 0.0;

  double polarized_norm() const { return std::sqrt(s1 * s1 + s2 * s2 + s3 * s3); }
  /// True when the polarized part does not exceed S0 (plus `allowance`).
  bool physical(double allowance = 0.0) const { return s0 > 0.0 && polarized_norm() <= s0 + allowance; }
  double docp() const { return std::abs(s3) / s0; }
};

}  // namespace qdsim
