#include "qdsim/evolve.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <map>
#include <string>

#include "qdsim/error.hpp"

namespace qdsim::dynamics {

void DecoherenceParams::validate() const {
  if (!(t1 > 0.0)) throw DomainError("T1 must be > 0");
  if (!(branching_eta >= 0.0 && branching_eta <= 1.0)) throw DomainError("branching ratio must lie in [0, 1]");
  if (!(gamma_phi >= 0.0)) throw DomainError("pure dephasing rate must be >= 0");
  if (!(eid_coeff >= 0.0)) throw DomainError("EID coefficient must be >= 0");
}

double DecoherenceParams::gamma_phi_for(double t2_star, double t1) { return 1.0 / t2_star - 0.5 / t1; }

DecoherenceParams DecoherenceParams::coherent() {
  return {std::numeric_limits<double>::infinity(), 0.5, 0.0, 0.0};
}

simd::LindbladRates DecoherenceParams::rates(double detuning) const {
  const double g = decay_rate();
  return {(1.0 - branching_eta) * g, branching_eta * g, gamma_phi, eid_coeff, -detuning};
}

DensityMatrix4 free_evolution(const DensityMatrix4& rho, double duration, const DecoherenceParams& dec,
                              double detuning) {
  if (duration == 0.0) return rho;
  const double g = dec.decay_rate();
  const double e = std::exp(-g * duration);
  const double eta = dec.branching_eta;
  const double lost = 1.0 - e;
  const double energies[4] = {0.0, 0.0, -detuning, 0.0};
  const double coh_gt = std::exp(-(0.5 * g + dec.gamma_phi) * duration);

  const Eigen::Matrix4cd& m = rho.matrix();
  Eigen::Matrix4cd out;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 4; ++j) {
      const int n_trion = (i >= 2) + (j >= 2);
      double mag = 1.0;
      if (n_trion == 1) mag = coh_gt;
      if (n_trion == 2) mag = e;
      const std::complex<double> phase = std::polar(1.0, -(energies[i] - energies[j]) * duration);
      out(i, j) = (i == j) ? std::complex<double>(m(i, j).real() * mag, 0.0) : m(i, j) * (mag * phase);
    }
  }
  const double p_tm = m(2, 2).real();
  const double p_tp = m(3, 3).real();
  out(0, 0) += lost * ((1.0 - eta) * p_tm + eta * p_tp);
  out(1, 1) += lost * (eta * p_tm + (1.0 - eta) * p_tp);
  return DensityMatrix4(out);
}

namespace {

struct Window {
  double start;
  double end;
  double length;
  std::size_t n_steps;
  double dt;
  std::vector<std::size_t> pulses;  // indices into the sequence
};

struct Plan {
  std::vector<Window> windows;
  double detuning = 0.0;
};

Plan make_plan(const PulseSequence& seq, const EvolveOptions& opts) {
  seq.validate();
  if (seq.pulses.empty()) throw DomainError("pulse sequence is empty");
  if (!(opts.dt > 0.0)) throw DomainError("dt must be > 0");
  Plan plan;
  plan.detuning = seq.pulses.front().detuning;
  for (const auto& p : seq.pulses) {
    if (p.detuning != plan.detuning) throw DomainError("all pulses of a sequence must share one detuning");
    if (opts.dt > p.fwhm / 50.0 * (1.0 + 1e-12))
      throw DomainError("step size: dt " + std::to_string(opts.dt) + " ps exceeds fwhm/50");
  }
  for (std::size_t k = 0; k < seq.pulses.size(); ++k) {
    const auto& p = seq.pulses[k];
    const double half = opts.window_sigmas * p.sigma();
    const double lo = p.center - half;
    const double hi = p.center + half;
    if (!plan.windows.empty() && lo <= plan.windows.back().end) {
      auto& w = plan.windows.back();
      w.end = std::max(w.end, hi);
      w.length = w.end - w.start;
      w.pulses.push_back(k);
    } else {
      plan.windows.push_back({lo, hi, 2.0 * half, 0, 0.0, {k}});
    }
  }
  for (auto& w : plan.windows) {
    const double len = w.length;
    w.n_steps = static_cast<std::size_t>(std::ceil(len / opts.dt - 1e-9));
    if (w.n_steps == 0) w.n_steps = 1;
    w.dt = len / static_cast<double>(w.n_steps);
  }
  return plan;
}

// Samples h(t) = Σ ½Ω_p(t) e^{−iφ_p} at the 2n+1 half-step nodes of `w`,
// writing lane `lane` of an interleaved buffer.
void sample_drive(const PulseSequence& seq, const Window& w, std::size_t lane, std::vector<double>& re,
                  std::vector<double>& im) {
  const std::size_t nodes = 2 * w.n_steps + 1;
  std::vector<GaussianEnvelope> env;
  std::vector<std::complex<double>> phase;
  for (std::size_t k : w.pulses) {
    env.emplace_back(seq.pulses[k]);
    phase.push_back(std::polar(0.5, -seq.pulses[k].carrier_phase));
  }
  const double half_dt = 0.5 * w.dt;
  for (std::size_t n = 0; n < nodes; ++n) {
    const double t = w.start + half_dt * static_cast<double>(n);
    std::complex<double> h = 0.0;
    if (env.size() == 1) {
      // Sample on the pulse's own clock so equal-width windows see identical envelopes.
      const double u = -0.5 * w.length + half_dt * static_cast<double>(n);
      h = env[0].at_offset(u) * phase[0];
    } else {
      for (std::size_t p = 0; p < env.size(); ++p) h += env[p](t) * phase[p];
    }
    re[n * simd::kBatch + lane] = h.real();
    im[n * simd::kBatch + lane] = h.imag();
  }
}

void check_state(const DensityMatrix4& rho, InvariantMonitor* monitor) {
  const auto c = rho.check();
  if (monitor) monitor->record(c);
  if (c.trace_error > 1e-6 || c.min_eigenvalue < -1e-6 || !std::isfinite(c.trace_error))
    throw NumericError("step size: density-matrix invariants drifted (trace error " + std::to_string(c.trace_error) +
                       ", min eigenvalue " + std::to_string(c.min_eigenvalue) + "); reduce dt");
}

std::vector<std::size_t> signature(const Plan& plan) {
  std::vector<std::size_t> sig;
  for (const auto& w : plan.windows) sig.push_back(w.n_steps);
  return sig;
}

}  // namespace

void InvariantMonitor::record(const DensityMatrix4::Check& c) {
  std::lock_guard lock(mutex_);
  max_trace_error_ = std::max(max_trace_error_, c.trace_error);
  min_eigenvalue_ = std::min(min_eigenvalue_, c.min_eigenvalue);
  ++states_;
}

double InvariantMonitor::max_trace_error() const {
  std::lock_guard lock(mutex_);
  return max_trace_error_;
}

double InvariantMonitor::min_eigenvalue() const {
  std::lock_guard lock(mutex_);
  return min_eigenvalue_;
}

std::size_t InvariantMonitor::states() const {
  std::lock_guard lock(mutex_);
  return states_;
}

EvolveResult evolve_traced(const DensityMatrix4& rho0, const PulseSequence& seq, const DecoherenceParams& dec,
                           const EvolveOptions& opts) {
  rho0.validate();
  dec.validate();
  const Plan plan = make_plan(seq, opts);
  const auto rates = dec.rates(plan.detuning);
  const auto kernel = simd::kernel_for(simd::KernelIsa::Scalar);

  EvolveResult result;
  DensityMatrix4 rho = rho0;
  std::vector<double> re, im;
  for (std::size_t wi = 0; wi < plan.windows.size(); ++wi) {
    const Window& w = plan.windows[wi];
    if (wi > 0) rho = free_evolution(rho, w.start - plan.windows[wi - 1].end, dec, plan.detuning);
    const std::size_t nodes = 2 * w.n_steps + 1;
    re.assign(nodes * simd::kBatch, 0.0);
    im.assign(nodes * simd::kBatch, 0.0);
    sample_drive(seq, w, 0, re, im);

    std::array<simd::LaneState, simd::kBatch> lanes{};
    lanes[0] = rho.to_lane();
    if (opts.trajectory_stride > 0) result.trajectory.push_back({w.start, rho});
    const std::size_t chunk = opts.trajectory_stride > 0 ? opts.trajectory_stride : w.n_steps;
    for (std::size_t done = 0; done < w.n_steps;) {
      const std::size_t n = std::min(chunk, w.n_steps - done);
      simd::DriveBlock block{re.data(), im.data(), 2 * done, n, w.dt, 1};
      kernel(lanes, block, rates);
      done += n;
      if (opts.trajectory_stride > 0)
        result.trajectory.push_back({w.start + w.dt * static_cast<double>(done), DensityMatrix4::from_lane(lanes[0])});
    }
    rho = DensityMatrix4::from_lane(lanes[0]);
    if (opts.check_invariants) check_state(rho, opts.monitor);
  }
  result.rho = rho;
  return result;
}

DensityMatrix4 evolve(const DensityMatrix4& rho0, const PulseSequence& seq, const DecoherenceParams& dec, double dt) {
  EvolveOptions opts;
  opts.dt = dt;
  return evolve_traced(rho0, seq, dec, opts).rho;
}

std::vector<DensityMatrix4> evolve_batch(std::span<const DensityMatrix4> rho0, std::span<const PulseSequence> seqs,
                                         const DecoherenceParams& dec, const EvolveOptions& opts) {
  if (rho0.size() != seqs.size()) throw DomainError("evolve_batch: state and sequence counts differ");
  dec.validate();
  const auto kernel = simd::kernel_for(opts.isa);

  std::vector<Plan> plans;
  plans.reserve(seqs.size());
  std::map<std::vector<std::size_t>, std::vector<std::size_t>> groups;
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    rho0[i].validate();
    plans.push_back(make_plan(seqs[i], opts));
    groups[signature(plans.back())].push_back(i);
  }

  std::vector<DensityMatrix4> out(seqs.size());
  std::vector<double> re, im;
  for (const auto& [sig, members] : groups) {
    for (std::size_t first = 0; first < members.size(); first += simd::kBatch) {
      const std::size_t active = std::min(simd::kBatch, members.size() - first);
      std::array<std::size_t, simd::kBatch> idx;
      for (std::size_t l = 0; l < simd::kBatch; ++l) idx[l] = members[first + std::min(l, active - 1)];

      // Lanes in one batch share detuning only if their sequences agree.
      const double detuning = plans[idx[0]].detuning;
      bool uniform = true;
      for (std::size_t l = 1; l < active; ++l) uniform = uniform && plans[idx[l]].detuning == detuning;
      if (!uniform) {
        for (std::size_t l = 0; l < active; ++l) {
          EvolveOptions single = opts;
          single.trajectory_stride = 0;
          out[idx[l]] = evolve_traced(rho0[idx[l]], seqs[idx[l]], dec, single).rho;
        }
        continue;
      }
      const auto rates = dec.rates(detuning);

      std::array<DensityMatrix4, simd::kBatch> rho;
      for (std::size_t l = 0; l < simd::kBatch; ++l) rho[l] = rho0[idx[l]];
      for (std::size_t wi = 0; wi < sig.size(); ++wi) {
        std::array<simd::LaneState, simd::kBatch> lanes;
        for (std::size_t l = 0; l < simd::kBatch; ++l) {
          const Plan& p = plans[idx[l]];
          if (wi > 0) rho[l] = free_evolution(rho[l], p.windows[wi].start - p.windows[wi - 1].end, dec, detuning);
          lanes[l] = rho[l].to_lane();
        }
        const std::size_t nodes = 2 * sig[wi] + 1;
        re.assign(nodes * simd::kBatch, 0.0);
        im.assign(nodes * simd::kBatch, 0.0);
        for (std::size_t l = 0; l < simd::kBatch; ++l) sample_drive(seqs[idx[l]], plans[idx[l]].windows[wi], l, re, im);
        // Every lane steps with its own dt; lanes with equal step counts but
        // different window lengths fall back to per-lane scalar integration.
        const double dt = plans[idx[0]].windows[wi].dt;
        bool same_dt = true;
        for (std::size_t l = 1; l < simd::kBatch; ++l) same_dt = same_dt && plans[idx[l]].windows[wi].dt == dt;
        if (same_dt) {
          simd::DriveBlock block{re.data(), im.data(), 0, sig[wi], dt, simd::kBatch};
          kernel(lanes, block, rates);
        } else {
          const auto scalar = simd::kernel_for(simd::KernelIsa::Scalar);
          for (std::size_t l = 0; l < simd::kBatch; ++l) {
            std::array<simd::LaneState, simd::kBatch> one{};
            one[0] = lanes[l];
            std::vector<double> r1(nodes * simd::kBatch, 0.0), i1(nodes * simd::kBatch, 0.0);
            for (std::size_t n = 0; n < nodes; ++n) {
              r1[n * simd::kBatch] = re[n * simd::kBatch + l];
              i1[n * simd::kBatch] = im[n * simd::kBatch + l];
            }
            simd::DriveBlock block{r1.data(), i1.data(), 0, sig[wi], plans[idx[l]].windows[wi].dt, 1};
            scalar(one, block, rates);
            lanes[l] = one[0];
          }
        }
        for (std::size_t l = 0; l < simd::kBatch; ++l) {
          rho[l] = DensityMatrix4::from_lane(lanes[l]);
          if (opts.check_invariants && l < active) check_state(rho[l], opts.monitor);
        }
      }
      for (std::size_t l = 0; l < active; ++l) out[idx[l]] = rho[l];
    }
  }
  return out;
}

}  // namespace qdsim::dynamics
