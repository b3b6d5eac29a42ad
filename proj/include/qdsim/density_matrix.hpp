#pragma once

#include <Eigen/Core>

#include "qdsim/simd/lindblad_kernel.hpp"

namespace qdsim::dynamics {

/// Basis indices of the double-Λ system.
enum Level : int { kGroundMinus = 0, kGroundPlus = 1, kTrionMinus = 2, kTrionPlus = 3 };

/// 4×4 density matrix over {g−, g+, t−, t+}.
class DensityMatrix4 {
 public:
  DensityMatrix4() : m_(Eigen::Matrix4cd::Zero()) {}
  explicit DensityMatrix4(const Eigen::Matrix4cd& m) : m_(m) {}

  static DensityMatrix4 diagonal(double g_minus, double g_plus, double t_minus, double t_plus);

  const Eigen::Matrix4cd& matrix() const { return m_; }
  Eigen::Matrix4cd& matrix() { return m_; }

  double population(Level level) const { return m_(level, level).real(); }
  double trion_population() const { return population(kTrionMinus) + population(kTrionPlus); }
  double trace() const { return m_.trace().real(); }
  double purity() const;
  double hermiticity_error() const;
  double min_eigenvalue() const;

  struct Check {
    double trace_error;
    double hermiticity_error;
    double min_eigenvalue;
  };
  Check check() const;

  /// Throws DomainError unless Hermitian (1e-10), trace one (1e-9) and positive (−1e-9).
  void validate() const;

  simd::LaneState to_lane() const;
  static DensityMatrix4 from_lane(const simd::LaneState& lane);

 private:
  Eigen::Matrix4cd m_;
};

/// Ground populations split evenly by weak above-band pumping: diag(½, ½, 0, 0).
DensityMatrix4 randomized_ground_state();

}  // namespace qdsim::dynamics
