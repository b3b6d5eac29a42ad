#include "qdsim/fits.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <numeric>
#include <set>

#include "qdsim/constants.hpp"
#include "qdsim/error.hpp"

namespace qdsim::analysis {

using constants::kPi;
using constants::kTwoPi;

namespace {

double mean_of(std::span<const double> v) { return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size()); }

std::complex<double> dft_at(std::span<const double> t, std::span<const double> y, double mean, double freq) {
  std::complex<double> acc = 0.0;
  for (std::size_t k = 0; k < t.size(); ++k) acc += (y[k] - mean) * std::polar(1.0, -kTwoPi * freq * t[k]);
  return acc;
}

double wrap(double x) { return x - kTwoPi * std::ceil((x - kPi) / kTwoPi); }

}  // namespace

FringeFit fit_fringe(std::span<const double> delay, std::span<const double> counts) {
  const std::size_t n = delay.size();
  if (n != counts.size()) throw DomainError("fit_fringe: length mismatch");
  if (n < 16) throw DomainError("fit_fringe: need at least 16 samples");
  const double span = delay.back() - delay.front();
  if (!(span > 0.0)) throw DomainError("fit_fringe: delays must increase");
  const double step = span / static_cast<double>(n - 1);
  const double mean = mean_of(counts);

  // Coarse spectrum on the natural bins, then refine on a 16× finer grid.
  const std::size_t n_bins = n / 2;
  std::vector<double> mag(n_bins + 1, 0.0);
  std::size_t peak = 1;
  for (std::size_t k = 1; k <= n_bins; ++k) {
    mag[k] = std::abs(dft_at(delay, counts, mean, static_cast<double>(k) / (step * static_cast<double>(n))));
    if (mag[k] > mag[peak]) peak = k;
  }
  double noise_sq = 0.0;
  std::size_t noise_n = 0;
  for (std::size_t k = 1; k <= n_bins; ++k) {
    if (k + 2 >= peak && k <= peak + 2) continue;
    noise_sq += mag[k] * mag[k];
    ++noise_n;
  }
  const double noise = noise_n ? std::sqrt(noise_sq / static_cast<double>(noise_n)) : 0.0;
  const double snr = noise > 0.0 ? mag[peak] / noise : (mag[peak] > 0.0 ? INFINITY : 0.0);
  if (!(snr >= kMinFourierSnr)) throw NumericError("no oscillation: Fourier peak SNR below 3");

  const double df = 1.0 / (step * static_cast<double>(n));
  double best_f = static_cast<double>(peak) * df;
  double best_mag = mag[peak];
  for (int s = -16; s <= 16; ++s) {
    const double f = (static_cast<double>(peak) + s / 16.0) * df;
    if (f <= 0.0) continue;
    const double m = std::abs(dft_at(delay, counts, mean, f));
    if (m > best_mag) {
      best_mag = m;
      best_f = f;
    }
  }
  const auto c = dft_at(delay, counts, mean, best_f);
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());

  const double period0 = 1.0 / best_f;
  const double phase0 = std::arg(c);
  const std::vector<double> init = {(*mx - *mn) / 2.0, period0, phase0, mean};
  auto model = [](double t, std::span<const double> p) { return p[3] + p[0] * std::cos(kTwoPi * t / p[1] + p[2]); };
  LsqOptions opts;
  opts.scale = {std::max(1e-12, std::abs(init[0])), period0, 1.0, std::max(1e-12, std::abs(mean))};
  FitReport rep = curve_fit(model, delay, counts, init, opts, {"amplitude", "period", "phase", "offset"});

  FringeFit out;
  out.amplitude = rep.params[0];
  out.period = rep.params[1];
  out.phase = rep.params[2];
  out.offset = rep.params[3];
  if (out.amplitude < 0.0) {
    out.amplitude = -out.amplitude;
    out.phase += kPi;
  }
  out.phase = wrap(out.phase);
  rep.params = {out.amplitude, out.period, out.phase, out.offset};
  out.contrast = out.amplitude / out.offset;
  const double ra = rep.sigmas[0] / std::max(out.amplitude, 1e-300);
  const double ro = rep.sigmas[3] / std::max(std::abs(out.offset), 1e-300);
  out.contrast_sigma = std::abs(out.contrast) * std::sqrt(ra * ra + ro * ro);
  out.fourier_snr = snr;
  out.report = std::move(rep);
  return out;
}

ContrastDecayFit fit_contrast_decay(std::span<const double> delay, std::span<const double> contrast) {
  if (delay.size() != contrast.size()) throw DomainError("fit_contrast_decay: length mismatch");
  if (delay.size() < 4) throw DomainError("fit_contrast_decay: need at least 4 delays");
  for (double c : contrast)
    if (!(c > 0.0 && c <= 1.0)) throw DomainError("fit_contrast_decay: contrasts must lie in (0, 1]");

  // Log-linear regression seeds the rate k = 1/T2*.
  const std::size_t n = delay.size();
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double y = std::log(contrast[i]);
    sx += delay[i];
    sy += y;
    sxx += delay[i] * delay[i];
    sxy += delay[i] * y;
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  const double icpt = (sy - slope * sx) / n;
  const double t_ref = delay.front();
  // Parametrize as C(τ) = A·exp(−k(τ − τ0)) so A and k decorrelate.
  std::vector<double> init = {std::exp(icpt + slope * t_ref), -slope};
  auto model = [t_ref](double t, std::span<const double> p) { return p[0] * std::exp(-p[1] * (t - t_ref)); };
  LsqOptions opts;
  opts.scale = {std::max(1e-6, init[0]), std::max(1e-6, std::abs(init[1]))};
  FitReport rep = curve_fit(model, delay, contrast, init, opts, {"amplitude_ref", "rate"});

  ContrastDecayFit out;
  const double a = rep.params[0];
  const double k = rep.params[1];
  const double sa = rep.sigmas[0];
  const double sk = rep.sigmas[1];
  out.c0 = a * std::exp(k * t_ref);
  if (k <= 1e-12) {
    out.t2_star = INFINITY;
    out.t2_star_sigma = INFINITY;
    rep.flags.push_back("non_decaying");
  } else {
    out.t2_star = 1.0 / k;
    out.t2_star_sigma = sk / (k * k);
  }
  const double c0_sigma = out.c0 * std::sqrt(std::pow(sa / a, 2) + std::pow(t_ref * sk, 2));
  rep.names = {"C0", "T2star"};
  rep.params = {out.c0, out.t2_star};
  rep.sigmas = {c0_sigma, out.t2_star_sigma};
  out.report = std::move(rep);
  return out;
}

double rabi_model(double sp, double kappa, double contrast, double damping, double offset, double slope) {
  const double theta = kappa * sp;
  return offset + slope * sp * sp + 0.5 * contrast * (1.0 - std::exp(-damping * theta * theta) * std::cos(theta));
}

RabiFit fit_rabi(std::span<const double> sqrt_power, std::span<const double> counts) {
  const std::size_t n = sqrt_power.size();
  if (n != counts.size()) throw DomainError("fit_rabi: length mismatch");
  if (n < 8) throw DomainError("fit_rabi: need at least 8 points");
  RabiFit out;
  const auto [mn, mx] = std::minmax_element(counts.begin(), counts.end());
  const double mean = mean_of(counts);
  // Below Poisson-level variation there is nothing to fit.
  const double floor = std::max(3.0 * std::sqrt(std::max(mean, 0.0)), 1e-9 * std::max(1.0, std::abs(mean)));
  if (*mx - *mn <= floor) {
    out.oscillating = false;
    out.offset = mean;
    out.report.names = {"kappa", "contrast", "damping", "offset", "slope"};
    out.report.params = {NAN, 0.0, NAN, mean, 0.0};
    out.report.sigmas = {NAN, 0.0, NAN, 0.0, 0.0};
    out.report.flags.push_back("non_oscillating");
    out.report.converged = true;
    return out;
  }
  // First maximum: the first point that beats its neighbours within a
  // window, ignoring wiggles below the noise floor.
  const std::size_t win = std::max<std::size_t>(2, n / 40);
  std::size_t first_max = static_cast<std::size_t>(mx - counts.begin());
  for (std::size_t i = win; i + win < n; ++i) {
    bool is_max = true;
    for (std::size_t j = i - win; j <= i + win && is_max; ++j) is_max = counts[j] <= counts[i];
    if (is_max && counts[i] - counts[0] > 0.5 * (*mx - *mn)) {
      first_max = i;
      break;
    }
  }
  if (!(sqrt_power[first_max] > 0.0)) throw NumericError("fit_rabi: cannot locate the first maximum");
  const double kappa0 = kPi / sqrt_power[first_max];
  const double c0 = counts[first_max] - counts[0];
  const std::vector<double> init = {kappa0, c0, 0.0, counts[0], 0.0};
  auto model = [](double sp, std::span<const double> p) { return rabi_model(sp, p[0], p[1], p[2], p[3], p[4]); };
  LsqOptions opts;
  const double p_max = sqrt_power.back() * sqrt_power.back();
  opts.scale = {kappa0, std::abs(c0), 1.0 / (kappa0 * kappa0 * p_max), std::max(1.0, std::abs(counts[0])),
                std::abs(c0) / std::max(p_max, 1e-12)};
  FitReport rep = curve_fit(model, sqrt_power, counts, init, opts, {"kappa", "contrast", "damping", "offset", "slope"});
  out.kappa = rep.params[0];
  out.contrast = rep.params[1];
  out.damping = rep.params[2];
  out.offset = rep.params[3];
  out.slope = rep.params[4];
  out.pi_sqrt_power = kPi / out.kappa;
  out.pi_power = out.pi_sqrt_power * out.pi_sqrt_power;
  out.report = std::move(rep);
  return out;
}

ZeemanFit fit_zeeman_fan(std::span<const FanPoint> points) {
  std::set<double> fields;
  for (const auto& p : points) {
    if (!(p.b >= 0.0)) throw DomainError("fit_zeeman_fan: fields must be >= 0");
    fields.insert(p.b);
  }
  if (fields.size() < 3) throw NumericError("rank: fan fit needs at least 3 distinct fields");

  // Branch signs for ascending energy, valid for g_h > g_e > 0 at B > 0.
  constexpr std::array<std::array<int, 2>, 4> kBranches = {{{-1, -1}, {1, -1}, {-1, 1}, {1, 1}}};
  const double mu = constants::kBohrMagneton;
  const std::size_t m = points.size() * 4;
  Eigen::MatrixXd a(m, 4);
  Eigen::VectorXd y(m);
  std::size_t row = 0;
  for (const auto& p : points) {
    std::array<double, 4> e = p.energies;
    std::sort(e.begin(), e.end());
    for (int k = 0; k < 4; ++k) {
      a(row, 0) = 1.0;
      a(row, 1) = p.b * p.b;
      a(row, 2) = kBranches[k][0] * mu * p.b / 2.0;
      a(row, 3) = kBranches[k][1] * mu * p.b / 2.0;
      y(row) = e[k];
      ++row;
    }
  }
  const Eigen::Matrix4d ata = a.transpose() * a;
  const Eigen::Vector4d aty = a.transpose() * y;
  const Eigen::Vector4d x = ata.ldlt().solve(aty);
  const Eigen::VectorXd resid = a * x - y;
  const double cost = resid.squaredNorm();
  const double dof = static_cast<double>(m) - 4.0;
  const Eigen::Matrix4d cov = ata.inverse() * (dof > 0 ? cost / dof : 0.0);

  ZeemanFit out;
  out.e0 = x(0);
  out.gamma = x(1);
  out.g_e = x(2);
  out.g_h = x(3);
  out.report.names = {"E0", "gamma", "g_e", "g_h"};
  out.report.params = {x(0), x(1), x(2), x(3)};
  for (int k = 0; k < 4; ++k) out.report.sigmas.push_back(std::sqrt(std::max(0.0, cov(k, k))));
  out.report.residual_rms = std::sqrt(cost / static_cast<double>(m));
  out.report.converged = true;
  out.report.n_iter = 1;
  if (!(out.g_h > out.g_e && out.g_e > 0.0)) out.report.flags.push_back("ambiguous_branch_order");
  return out;
}

CorrectedCurve subtract_background(std::span<const double> x_signal, std::span<const double> signal,
                                   std::span<const double> x_background, std::span<const double> background) {
  if (x_signal.size() != signal.size() || x_background.size() != background.size())
    throw DomainError("subtract_background: curve length mismatch");
  if (x_signal.size() != x_background.size() || !std::equal(x_signal.begin(), x_signal.end(), x_background.begin()))
    throw DomainError("abscissa mismatch: signal and background grids differ");
  CorrectedCurve out;
  out.x.assign(x_signal.begin(), x_signal.end());
  for (std::size_t k = 0; k < signal.size(); ++k) {
    const double d = signal[k] - background[k];
    out.y.push_back(d);
    out.flags.push_back(d < 0.0 ? PointFlag::Negative : (d == 0.0 ? PointFlag::Boundary : PointFlag::Ok));
  }
  return out;
}

}  // namespace qdsim::analysis
