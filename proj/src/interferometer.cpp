#include "qdsim/interferometer.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

#include "qdsim/error.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::interferometer {

using constants::kPi;
using constants::kTwoPi;

void DelaySchedule::validate() const {
  if (!(coarse_start > 0.0 && coarse_step > 0.0 && fine_span > 0.0))
    throw DomainError("delay schedule steps and spans must be > 0");
  if (n_coarse == 0 || n_fine < 2) throw DomainError("delay schedule needs n_coarse >= 1 and n_fine >= 2");
}

std::vector<double> DelaySchedule::coarse_delays() const {
  std::vector<double> out(n_coarse);
  for (std::size_t k = 0; k < n_coarse; ++k) out[k] = coarse_start + coarse_step * static_cast<double>(k);
  return out;
}

std::vector<double> DelaySchedule::fine_delays() const {
  std::vector<double> out(n_fine);
  for (std::size_t k = 0; k < n_fine; ++k)
    out[k] = fine_span * static_cast<double>(k) / static_cast<double>(n_fine - 1);
  return out;
}

void DriftTrace::validate() const {
  if (timestamps.empty() || timestamps.size() != path_drift.size())
    throw DomainError("drift trace is empty or has mismatched columns");
  for (std::size_t k = 1; k < timestamps.size(); ++k)
    if (!(timestamps[k] > timestamps[k - 1])) throw DomainError("drift timestamps must increase strictly");
}

namespace {
// Linear interpolation on a strictly increasing abscissa; exact at nodes.
double interp(std::span<const double> x, std::span<const double> y, double t) {
  if (x.size() == 1) {
    if (t != x[0]) throw DomainError("coverage: time outside trace");
    return y[0];
  }
  if (t < x.front() || t > x.back())
    throw DomainError("coverage: time " + std::to_string(t) + " s outside trace");
  auto it = std::upper_bound(x.begin(), x.end(), t);
  std::size_t hi = static_cast<std::size_t>(it - x.begin());
  if (hi == x.size()) return y.back();
  const std::size_t lo = hi - 1;
  if (t == x[lo]) return y[lo];
  const double w = (t - x[lo]) / (x[hi] - x[lo]);
  return y[lo] + w * (y[hi] - y[lo]);
}
}  // namespace

double DriftTrace::at(double t) const { return interp(timestamps, path_drift, t); }

double wrap_phase(double x) { return x - kTwoPi * std::ceil((x - kPi) / kTwoPi); }

DriftTrace generate_drift(double duration, std::size_t n_samples, double sigma_rw, double linear, std::uint64_t seed) {
  if (!(duration > 0.0)) throw DomainError("drift duration must be > 0");
  if (n_samples < 2) throw DomainError("drift trace needs at least two samples");
  if (!(sigma_rw >= 0.0)) throw DomainError("random-walk strength must be >= 0");
  DriftTrace trace;
  trace.seed = seed;
  trace.timestamps.resize(n_samples);
  trace.path_drift.resize(n_samples);
  const double step = duration / static_cast<double>(n_samples - 1);
  const double sd = sigma_rw * std::sqrt(step);
  double walk = 0.0;
  for (std::size_t k = 0; k < n_samples; ++k) {
    const double t = step * static_cast<double>(k);
    if (k > 0 && sd > 0.0) {
      auto gen = substream(seed, StreamDomain::Drift, k);
      walk += std::normal_distribution<double>(0.0, sd)(gen);
    }
    trace.timestamps[k] = t;
    trace.path_drift[k] = linear * t + walk;
  }
  trace.timestamps.back() = duration;
  trace.path_drift.back() = linear * duration + walk;
  return trace;
}

HeNeTrace hene_wrapped_phase(const DriftTrace& drift, double lambda_hene, int sign) {
  if (!(lambda_hene > 0.0)) throw DomainError("HeNe wavelength must be > 0");
  if (sign != 1 && sign != -1) throw DomainError("HeNe sign must be +1 or -1");
  drift.validate();
  HeNeTrace out;
  out.timestamps = drift.timestamps;
  out.wrapped_phase.reserve(drift.path_drift.size());
  for (double dl : drift.path_drift) out.wrapped_phase.push_back(wrap_phase(sign * kTwoPi * dl / lambda_hene));
  return out;
}

std::vector<double> unwrap_phase(std::span<const double> wrapped) {
  std::vector<double> out(wrapped.size());
  if (wrapped.empty()) return out;
  long long turns = 0;
  out[0] = wrapped[0];
  for (std::size_t k = 1; k < wrapped.size(); ++k) {
    const double d = wrapped[k] - wrapped[k - 1];
    if (std::abs(d) > kPi) turns -= std::llround(d / kTwoPi);
    out[k] = wrapped[k] + kTwoPi * static_cast<double>(turns);
  }
  return out;
}

double drift_to_delay(double unwrapped, double lambda_hene) {
  if (!(lambda_hene > 0.0)) throw DomainError("HeNe wavelength must be > 0");
  return unwrapped * lambda_hene / (kTwoPi * constants::kSpeedOfLight);
}

std::vector<double> drift_to_delay(std::span<const double> unwrapped, double lambda_hene) {
  std::vector<double> out;
  out.reserve(unwrapped.size());
  for (double p : unwrapped) out.push_back(drift_to_delay(p, lambda_hene));
  return out;
}

double fringe_period_fs(double lambda_nm) {
  if (!(lambda_nm > 0.0)) throw DomainError("wavelength must be > 0");
  return lambda_nm / constants::kSpeedOfLight;
}

CorrectionResult correct_su2_map(const DelayMap& raw, const HeNeTrace& hene, std::span<const double> target_axis,
                                 double lambda_hene, int sign, double fold_period_fs) {
  if (!(fold_period_fs >= 0.0)) throw DomainError("fold period must be >= 0");
  const std::size_t rows = raw.rows();
  const std::size_t cols = raw.cols();
  if (raw.values.size() != rows * cols || raw.timestamps.size() != rows * cols)
    throw DomainError("delay map shape mismatch");
  if (target_axis.empty()) throw DomainError("target axis is empty");
  for (std::size_t k = 1; k < target_axis.size(); ++k)
    if (!(target_axis[k] > target_axis[k - 1])) throw DomainError("target axis must increase strictly");
  for (std::size_t k = 1; k < cols; ++k)
    if (!(raw.fine_delay[k] > raw.fine_delay[k - 1])) throw DomainError("fine axis must increase strictly");
  if (hene.timestamps.empty() || hene.timestamps.size() != hene.wrapped_phase.size())
    throw DomainError("coverage: HeNe trace is empty");
  const auto [tmin, tmax] = std::minmax_element(raw.timestamps.begin(), raw.timestamps.end());
  if (*tmin < hene.timestamps.front() || *tmax > hene.timestamps.back())
    throw DomainError("coverage: HeNe trace does not span the acquisition");

  const std::vector<double> unwrapped = unwrap_phase(hene.wrapped_phase);
  std::vector<double> delay = drift_to_delay(unwrapped, lambda_hene);
  if (sign < 0)
    for (double& d : delay) d = -d;

  CorrectionResult result;
  result.realized_delay.resize(rows * cols);
  result.map.sqrt_power = raw.sqrt_power;
  result.map.fine_delay.assign(target_axis.begin(), target_axis.end());
  result.map.values.assign(rows * target_axis.size(), std::nan(""));
  result.map.timestamps.assign(rows * target_axis.size(), std::nan(""));

  std::vector<std::size_t> order(cols);
  std::vector<double> xs(cols), ys(cols), ts(cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = raw.timestamps[r * cols + c];
      const double shift = (delay.size() == 1) ? delay[0] : interp(hene.timestamps, delay, t);
      result.realized_delay[r * cols + c] = raw.fine_delay[c] + shift;
    }
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return result.realized_delay[r * cols + a] < result.realized_delay[r * cols + b];
    });
    for (std::size_t k = 0; k < cols; ++k) {
      xs[k] = result.realized_delay[r * cols + order[k]];
      ys[k] = raw.values[r * cols + order[k]];
      ts[k] = raw.timestamps[r * cols + order[k]];
    }
    for (std::size_t j = 0; j < target_axis.size(); ++j) {
      double x = target_axis[j];
      if (fold_period_fs > 0.0 && (x < xs.front() || x > xs.back()))
        x += fold_period_fs * std::ceil((xs.front() - x) / fold_period_fs);
      if (x < xs.front() || x > xs.back()) {
        ++result.n_missing;
        continue;
      }
      auto it = std::lower_bound(xs.begin(), xs.end(), x);
      std::size_t hi = static_cast<std::size_t>(it - xs.begin());
      double v, tv;
      if (xs[hi] == x) {
        v = ys[hi];
        tv = ts[hi];
      } else {
        const std::size_t lo = hi - 1;
        const double w = (x - xs[lo]) / (xs[hi] - xs[lo]);
        v = ys[lo] + w * (ys[hi] - ys[lo]);
        tv = ts[lo] + w * (ts[hi] - ts[lo]);
      }
      result.map.values[r * target_axis.size() + j] = v;
      result.map.timestamps[r * target_axis.size() + j] = tv;
    }
  }
  return result;
}

}  // namespace qdsim::interferometer
