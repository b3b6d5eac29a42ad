#include "qdsim/least_squares.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "qdsim/error.hpp"

namespace qdsim::analysis {

double FitReport::param(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return params[k];
  throw DomainError("fit report has no parameter '" + name + "'");
}

double FitReport::sigma(const std::string& name) const {
  for (std::size_t k = 0; k < names.size(); ++k)
    if (names[k] == name) return sigmas[k];
  throw DomainError("fit report has no parameter '" + name + "'");
}

bool FitReport::has_flag(const std::string& flag) const {
  return std::find(flags.begin(), flags.end(), flag) != flags.end();
}

std::vector<double> numeric_jacobian(const ResidualFn& residuals, std::size_t m, std::span<const double> params,
                                     double rel_step, std::span<const double> scale) {
  const std::size_t n = params.size();
  std::vector<double> jac(m * n);
  std::vector<double> p(params.begin(), params.end());
  std::vector<double> rp(m), rm(m);
  for (std::size_t j = 0; j < n; ++j) {
    const double floor = scale.empty() ? 1.0 : scale[j];
    const double h = rel_step * std::max(std::abs(params[j]), floor);
    p[j] = params[j] + h;
    residuals(p, rp);
    p[j] = params[j] - h;
    residuals(p, rm);
    p[j] = params[j];
    const double span = 2.0 * h;
    for (std::size_t i = 0; i < m; ++i) jac[i * n + j] = (rp[i] - rm[i]) / span;
  }
  return jac;
}

namespace {

double sum_sq(std::span<const double> r) {
  double s = 0.0;
  for (double v : r) s += v * v;
  return s;
}

bool all_finite(std::span<const double> r) {
  return std::all_of(r.begin(), r.end(), [](double v) { return std::isfinite(v); });
}

}  // namespace

FitReport least_squares(const ResidualFn& residuals, std::size_t m, std::vector<double> init, const LsqOptions& opts,
                        std::vector<std::string> names) {
  const std::size_t n = init.size();
  if (n == 0) throw DomainError("least_squares: no parameters");
  if (m < n) throw DomainError("least_squares: fewer residuals than parameters");
  if (!opts.scale.empty() && opts.scale.size() != n) throw DomainError("least_squares: scale arity mismatch");
  if (names.empty())
    for (std::size_t k = 0; k < n; ++k) names.push_back("p" + std::to_string(k));
  if (names.size() != n) throw DomainError("least_squares: names arity mismatch");

  using Mat = Eigen::MatrixXd;
  using Vec = Eigen::VectorXd;
  std::vector<double> p = std::move(init);
  std::vector<double> r(m), trial_r(m), trial(n);
  residuals(p, r);
  if (!all_finite(r)) throw DomainError("least_squares: non-finite residuals at the initial point");
  double cost = sum_sq(r);
  const double initial_cost = cost;

  FitReport rep;
  rep.names = std::move(names);
  double lambda = 0.0;
  Mat jac(m, n);
  auto refresh_jacobian = [&] {
    const auto j = numeric_jacobian(residuals, m, p, opts.jacobian_step, opts.scale);
    for (std::size_t i = 0; i < m; ++i)
      for (std::size_t k = 0; k < n; ++k) jac(i, k) = j[i * n + k];
  };
  auto full_rank = [&] {
    Eigen::ColPivHouseholderQR<Mat> qr(jac);
    qr.setThreshold(1e-9);
    return static_cast<std::size_t>(qr.rank()) == n;
  };

  refresh_jacobian();
  for (rep.n_iter = 0; rep.n_iter < opts.max_iter;) {
    ++rep.n_iter;
    const Mat jtj = jac.transpose() * jac;
    const Vec grad = jac.transpose() * Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(m));
    const double diag_max = jtj.diagonal().maxCoeff();
    bool accepted = false;
    double step_norm = 0.0;
    for (int attempt = 0; attempt < 40 && !accepted; ++attempt) {
      Mat a = jtj;
      for (std::size_t k = 0; k < n; ++k) a(k, k) += lambda * std::max(jtj(k, k), 1e-12 * diag_max);
      Vec delta;
      if (lambda == 0.0) {
        // Undamped step via QR on J itself, which tolerates rank loss better than JᵀJ.
        Eigen::ColPivHouseholderQR<Mat> qr(jac);
        qr.setThreshold(1e-9);
        if (static_cast<std::size_t>(qr.rank()) < n) {
          lambda = 1e-3;
          continue;
        }
        delta = -qr.solve(Eigen::Map<const Vec>(r.data(), static_cast<Eigen::Index>(m)));
      } else {
        delta = -a.ldlt().solve(grad);
      }
      for (std::size_t k = 0; k < n; ++k) trial[k] = p[k] + delta(static_cast<Eigen::Index>(k));
      residuals(trial, trial_r);
      const double trial_cost = all_finite(trial_r) ? sum_sq(trial_r) : INFINITY;
      if (trial_cost <= cost) {
        const double old_cost = cost;
        double pnorm = 0.0;
        for (double v : p) pnorm += v * v;
        step_norm = delta.norm();
        p = trial;
        r = trial_r;
        cost = trial_cost;
        accepted = true;
        lambda = (lambda <= 1e-7) ? 0.0 : lambda / 10.0;
        const bool small_cost_change = (old_cost - cost) <= opts.tol * std::max(old_cost, 1e-300);
        const bool small_step = step_norm <= opts.tol * (std::sqrt(pnorm) + opts.tol);
        // Residuals at roundoff level of the starting point: exact data.
        const bool exact = cost <= 1e-28 * initial_cost;
        if (cost <= 1e-300 || exact || small_cost_change || small_step) {
          rep.converged = true;
        }
      } else {
        lambda = (lambda == 0.0) ? 1e-3 : lambda * 10.0;
      }
    }
    if (!accepted) {
      // No descent direction left at any damping: stationary point.
      rep.converged = true;
    }
    if (rep.converged) break;
    refresh_jacobian();
  }

  refresh_jacobian();
  if (!full_rank()) throw NumericError("singular Jacobian: parameters are not identifiable");
  const Mat jtj = jac.transpose() * jac;
  const std::size_t dof = m - n;
  const double s2 = dof > 0 ? cost / static_cast<double>(dof) : 0.0;
  const Mat cov = jtj.inverse() * s2;
  rep.params = p;
  rep.sigmas.resize(n);
  for (std::size_t k = 0; k < n; ++k) rep.sigmas[k] = std::sqrt(std::max(0.0, cov(k, k)));
  rep.residual_rms = std::sqrt(cost / static_cast<double>(m));
  return rep;
}

FitReport curve_fit(const CurveModel& model, std::span<const double> x, std::span<const double> y,
                    std::vector<double> init, const LsqOptions& opts, std::vector<std::string> names) {
  if (x.size() != y.size()) throw DomainError("curve_fit: x and y lengths differ");
  if (!all_finite(y) || !all_finite(x)) throw DomainError("curve_fit: data must be finite");
  auto fn = [&](std::span<const double> p, std::span<double> out) {
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = model(x[i], p) - y[i];
  };
  return least_squares(fn, x.size(), std::move(init), opts, std::move(names));
}

}  // namespace qdsim::analysis
