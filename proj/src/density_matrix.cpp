#include "qdsim/density_matrix.hpp"

#include <Eigen/Eigenvalues>
#include <cmath>

#include "qdsim/error.hpp"

namespace qdsim::dynamics {

DensityMatrix4 DensityMatrix4::diagonal(double g_minus, double g_plus, double t_minus, double t_plus) {
  Eigen::Matrix4cd m = Eigen::Matrix4cd::Zero();
  m(0, 0) = g_minus;
  m(1, 1) = g_plus;
  m(2, 2) = t_minus;
  m(3, 3) = t_plus;
  return DensityMatrix4(m);
}

double DensityMatrix4::purity() const { return (m_ * m_).trace().real(); }

double DensityMatrix4::hermiticity_error() const { return (m_ - m_.adjoint()).cwiseAbs().maxCoeff(); }

double DensityMatrix4::min_eigenvalue() const {
  const Eigen::Matrix4cd h = 0.5 * (m_ + m_.adjoint());
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix4cd> solver(h, Eigen::EigenvaluesOnly);
  return solver.eigenvalues().minCoeff();
}

DensityMatrix4::Check DensityMatrix4::check() const {
  return {std::abs(trace() - 1.0), hermiticity_error(), min_eigenvalue()};
}

void DensityMatrix4::validate() const {
  const Check c = check();
  if (!(c.hermiticity_error <= 1e-10)) throw DomainError("density matrix is not Hermitian");
  if (!(c.trace_error <= 1e-9)) throw DomainError("density matrix trace differs from one");
  if (!(c.min_eigenvalue >= -1e-9)) throw DomainError("density matrix has a negative eigenvalue");
}

simd::LaneState DensityMatrix4::to_lane() const {
  simd::LaneState lane{};
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      lane[4 * i + j] = m_(i, j).real();
      lane[16 + 4 * i + j] = m_(i, j).imag();
    }
  }
  return lane;
}

DensityMatrix4 DensityMatrix4::from_lane(const simd::LaneState& lane) {
  Eigen::Matrix4cd m;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j) m(i, j) = {lane[4 * i + j], lane[16 + 4 * i + j]};
  return DensityMatrix4(m);
}

DensityMatrix4 randomized_ground_state() { return DensityMatrix4::diagonal(0.5, 0.5, 0.0, 0.0); }

}  // namespace qdsim::dynamics
