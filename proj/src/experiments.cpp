#include "qdsim/experiments.hpp"

#include <cmath>
#include <string>

#include "qdsim/error.hpp"
#include "qdsim/parallel.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::dynamics {

void CountModel::validate() const {
  if (!(rep_rate > 0.0)) throw DomainError("repetition rate must be > 0");
  if (!(integration_time >= 0.0 && efficiency >= 0.0 && background_rate >= 0.0 && incoherent_slope >= 0.0))
    throw DomainError("count-model parameters must be non-negative");
}

double CountModel::expected(double trion_population, double branching_eta, double sqrt_power) const {
  return signal_scale() * branching_eta * trion_population + background_counts() +
         incoherent_slope * sqrt_power * sqrt_power * integration_time;
}

namespace {

// Evolves all sequences in parallel chunks; each chunk packs its own SIMD batches.
std::vector<DensityMatrix4> evolve_all(const std::vector<DensityMatrix4>& rho0, const std::vector<PulseSequence>& seqs,
                                       const DecoherenceParams& dec, const EvolveOptions& opts) {
  std::vector<DensityMatrix4> out(seqs.size());
  parallel_chunks(seqs.size(), [&](std::size_t lo, std::size_t hi) {
    auto part = evolve_batch(std::span(rho0).subspan(lo, hi - lo), std::span(seqs).subspan(lo, hi - lo), dec, opts);
    for (std::size_t k = lo; k < hi; ++k) out[k] = part[k - lo];
  });
  return out;
}

void require_grid(std::span<const double> grid, const char* what) {
  if (grid.empty()) throw DomainError(std::string(what) + " grid is empty");
  for (std::size_t k = 1; k < grid.size(); ++k)
    if (!(grid[k] > grid[k - 1])) throw DomainError(std::string(what) + " grid must be ascending");
}

RabiCurve rabi_like(std::span<const double> sqrt_power, double kappa, const DecoherenceParams& dec,
                    const CountModel& counts, const SimOptions& opts, const DensityMatrix4& initial,
                    StreamDomain domain) {
  require_grid(sqrt_power, "sqrt(power)");
  counts.validate();
  RabiCurve curve;
  curve.sqrt_power.assign(sqrt_power.begin(), sqrt_power.end());
  std::vector<PulseSequence> seqs;
  for (double sp : sqrt_power) {
    const double theta = area_from_sqrt_power(sp, kappa);
    curve.theta.push_back(theta);
    PulseSequence seq;
    seq.pulses.push_back({theta, opts.fwhm, 0.0, 0.0, opts.detuning});
    seqs.push_back(seq);
  }
  const std::vector<DensityMatrix4> rho0(seqs.size(), initial);
  const auto final_states = evolve_all(rho0, seqs, dec, opts.evolve);
  for (std::size_t k = 0; k < seqs.size(); ++k) {
    const double p = final_states[k].trion_population();
    curve.population.push_back(p);
    curve.expected.push_back(counts.expected(p, dec.branching_eta, curve.sqrt_power[k]));
  }
  curve.counts = sample_counts(counts, domain, curve.expected);
  return curve;
}

}  // namespace

std::vector<double> sample_counts(const CountModel& counts, StreamDomain domain, std::span<const double> expected) {
  std::vector<double> sampled(expected.size());
  for (std::size_t k = 0; k < expected.size(); ++k)
    sampled[k] = counts.sample ? poisson_sample(expected[k], counts.rng_seed, domain, k) : expected[k];
  return sampled;
}

RabiCurve simulate_rabi(std::span<const double> sqrt_power, double kappa, const DecoherenceParams& dec,
                        const CountModel& counts, const SimOptions& opts, const DensityMatrix4& initial) {
  return rabi_like(sqrt_power, kappa, dec, counts, opts, initial, StreamDomain::Rabi);
}

RabiCurve simulate_background_control(std::span<const double> sqrt_power, double kappa, const DecoherenceParams& dec,
                                      const CountModel& counts, const SimOptions& opts, double leakage) {
  if (!(leakage >= 0.0 && leakage <= 1.0)) throw DomainError("leakage must lie in [0, 1]");
  return rabi_like(sqrt_power, kappa, dec, counts, opts, DensityMatrix4::diagonal(leakage, 1.0 - leakage, 0.0, 0.0),
                   StreamDomain::Background);
}

RamseyData simulate_ramsey(double theta, std::span<const double> coarse_ps, std::span<const double> fine_fs,
                           double lambda_qd, const DecoherenceParams& dec, const CountModel& counts,
                           const SimOptions& opts, const DensityMatrix4& initial) {
  require_grid(coarse_ps, "coarse delay");
  if (fine_fs.empty()) throw DomainError("fine delay grid is empty");
  counts.validate();
  RamseyData data;
  data.theta = theta;
  data.coarse.assign(coarse_ps.begin(), coarse_ps.end());
  data.fine.assign(fine_fs.begin(), fine_fs.end());
  std::vector<PulseSequence> seqs;
  for (double tc : coarse_ps) {
    for (double tf : fine_fs) {
      PulseSequence seq = two_pulse_sequence(theta, opts.fwhm, tc, tf, lambda_qd);
      for (auto& p : seq.pulses) p.detuning = opts.detuning;
      seq.require_interference_free(5.0);
      data.phase.push_back(seq.pulses[1].carrier_phase);
      seqs.push_back(std::move(seq));
    }
  }
  const std::vector<DensityMatrix4> rho0(seqs.size(), initial);
  const auto final_states = evolve_all(rho0, seqs, dec, opts.evolve);
  for (const auto& rho : final_states) {
    data.population.push_back(rho.trion_population());
    data.expected.push_back(counts.expected(data.population.back(), dec.branching_eta, 0.0));
  }
  data.counts = sample_counts(counts, StreamDomain::Ramsey, data.expected);
  return data;
}

interferometer::DelayMap Su2Map::as_delay_map(const std::vector<double>& values) const {
  interferometer::DelayMap m;
  m.sqrt_power = sqrt_power;
  m.fine_delay = fine;
  m.values = values;
  m.timestamps = timestamps;
  return m;
}

Su2Map simulate_su2_map(std::span<const double> sqrt_power, std::span<const double> fine_fs, double coarse_ps,
                        double kappa, double lambda_qd, const DecoherenceParams& dec, const CountModel& counts,
                        const SimOptions& opts, const interferometer::DriftTrace* drift,
                        const DensityMatrix4& initial) {
  require_grid(sqrt_power, "sqrt(power)");
  require_grid(fine_fs, "fine delay");
  counts.validate();
  Su2Map map;
  map.coarse = coarse_ps;
  map.sqrt_power.assign(sqrt_power.begin(), sqrt_power.end());
  map.fine.assign(fine_fs.begin(), fine_fs.end());
  const std::size_t n = sqrt_power.size() * fine_fs.size();
  if (drift) {
    drift->validate();
    const double last = counts.integration_time * static_cast<double>(n - 1);
    if (drift->timestamps.front() > 0.0 || drift->timestamps.back() < last)
      throw DomainError("coverage: drift trace does not span the acquisition");
  }
  std::vector<PulseSequence> seqs;
  seqs.reserve(n);
  for (std::size_t r = 0; r < sqrt_power.size(); ++r) {
    const double theta = area_from_sqrt_power(sqrt_power[r], kappa);
    map.theta.push_back(theta);
    for (std::size_t c = 0; c < fine_fs.size(); ++c) {
      const double t = counts.integration_time * static_cast<double>(r * fine_fs.size() + c);
      const double shift = drift ? drift->at(t) / constants::kSpeedOfLight : 0.0;
      const double realized = fine_fs[c] + shift;
      PulseSequence seq = two_pulse_sequence(theta, opts.fwhm, coarse_ps, realized, lambda_qd);
      for (auto& p : seq.pulses) p.detuning = opts.detuning;
      seq.require_interference_free(5.0);
      map.timestamps.push_back(t);
      map.realized_fine.push_back(realized);
      map.phase.push_back(seq.pulses[1].carrier_phase);
      seqs.push_back(std::move(seq));
    }
  }
  const std::vector<DensityMatrix4> rho0(seqs.size(), initial);
  const auto final_states = evolve_all(rho0, seqs, dec, opts.evolve);
  for (std::size_t k = 0; k < n; ++k) {
    map.population.push_back(final_states[k].trion_population());
    const double sp = map.sqrt_power[k / fine_fs.size()];
    map.expected.push_back(counts.expected(map.population.back(), dec.branching_eta, sp));
  }
  map.counts = sample_counts(counts, StreamDomain::Su2Map, map.expected);
  return map;
}

}  // namespace qdsim::dynamics
