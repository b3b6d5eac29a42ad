#pragma once

#include <functional>
#include <span>
#include <string>
#include <vector>

namespace qdsim::analysis {

struct FitReport {
  std::vector<std::string> names;
  std::vector<double> params;
  std::vector<double> sigmas;   // one standard error
  double residual_rms = 0.0;
  bool converged = false;
  int n_iter = 0;
  std::vector<std::string> flags;

  /// Value of the named parameter; throws DomainError if absent.
  double param(const std::string& name) const;
  double sigma(const std::string& name) const;
  bool has_flag(const std::string& flag) const;
};

/// residuals(params, out): fills `out` (fixed length) for the given parameters.
using ResidualFn = std::function<void(std::span<const double>, std::span<double>)>;

struct LsqOptions {
  double tol = 1e-10;     // relative change in cost or parameters
  int max_iter = 200;
  double jacobian_step = 1e-6;  // relative central-difference step
  std::vector<double> scale;    // per-parameter magnitude floor for the step; default 1
};

/// Damped Gauss-Newton: tries the undamped step first and falls back to
/// Levenberg damping (λ·diag JᵀJ) when the cost would rise. Never throws on
/// max_iter; throws NumericError when the Jacobian stays rank-deficient.
FitReport least_squares(const ResidualFn& residuals, std::size_t n_residuals, std::vector<double> init,
                        const LsqOptions& opts = {}, std::vector<std::string> names = {});

/// Central-difference Jacobian, row-major [residual][param].
std::vector<double> numeric_jacobian(const ResidualFn& residuals, std::size_t n_residuals, std::span<const double> params,
                                     double rel_step, std::span<const double> scale = {});

/// y ≈ model(x, params) convenience wrapper.
using CurveModel = std::function<double(double, std::span<const double>)>;
FitReport curve_fit(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<double> init, const LsqOptions& opts = {}, std::vector<std::string> names = {});

}  // namespace qdsim::analysis
