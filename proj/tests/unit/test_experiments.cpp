#include <cmath>
#include <cstdlib>
#include <numeric>
#include <vector>

#include <doctest.h>

#include "qdsim/error.hpp"
#include "qdsim/experiments.hpp"
#include "qdsim/fits.hpp"
#include "qdsim/rng.hpp"

using namespace qdsim;
using namespace qdsim::dynamics;
using constants::kPi;

namespace {

const double kKappa = 4 * kPi / 2.5;

CountModel noiseless() {
  CountModel m;
  m.sample = false;
  return m;
}

SimOptions quasi_delta() {
  SimOptions o;
  o.fwhm = 0.03;
  o.evolve.dt = o.fwhm / 50;
  return o;
}

std::vector<double> theta_grid(std::size_t n) {
  std::vector<double> sp(n);
  for (std::size_t i = 0; i < n; ++i) sp[i] = 2.5 * static_cast<double>(i) / static_cast<double>(n - 1);
  return sp;
}

}  // namespace

TEST_CASE("count model") {
  const auto m = noiseless();
  CHECK(m.expected(0.0, 0.5, 0.0) == m.background_counts());
  CHECK(m.background_counts() == doctest::Approx(200.0 * 1.7578125));
  CHECK(m.expected(1.0, 0.5, 0.0) - m.background_counts() == doctest::Approx(0.5 * m.signal_scale()));
  auto bad = m;
  bad.efficiency = -1;
  CHECK_THROWS_AS(bad.validate(), DomainError);
}

TEST_CASE("poisson draws are keyed per point") {
  const std::vector<double> mean = {10.0, 200.0, 5000.0, 0.0, 42.0};
  CountModel m;
  m.rng_seed = 9;
  const auto all = sample_counts(m, StreamDomain::Rabi, mean);
  for (std::size_t i = mean.size(); i-- > 0;)
    CHECK(all[i] == poisson_sample(mean[i], 9, StreamDomain::Rabi, i));
  CHECK(all[3] == 0.0);
  CHECK(sample_counts(m, StreamDomain::Rabi, mean) == all);
  CHECK(sample_counts(m, StreamDomain::Ramsey, mean) != all);
  m.sample = false;
  CHECK(sample_counts(m, StreamDomain::Rabi, mean) == mean);
}

TEST_CASE("distinct substreams differ") {
  auto a = substream(1, StreamDomain::Rabi, 0);
  auto b = substream(1, StreamDomain::Rabi, 1);
  auto c = substream(2, StreamDomain::Rabi, 0);
  const auto x = a();
  CHECK(x != b());
  CHECK(x != c());
  CHECK(substream(1, StreamDomain::Rabi, 0)() == x);
}

TEST_CASE("ideal rabi curve") {
  const auto sp = theta_grid(81);
  const auto curve = simulate_rabi(sp, kKappa, DecoherenceParams::coherent(), noiseless(), quasi_delta());
  const auto m = noiseless();
  CHECK(curve.expected[0] == doctest::Approx(m.background_counts()).epsilon(1e-12));
  for (std::size_t i = 0; i < sp.size(); ++i) {
    // Half the population starts in the undriven ground state.
    CHECK(curve.population[i] == doctest::Approx(0.5 * std::pow(std::sin(curve.theta[i] / 2), 2)).epsilon(2e-4));
    CHECK(curve.counts[i] == curve.expected[i]);
  }
  // θ = π, 2π, 3π, 4π sit at indices 20, 40, 60, 80.
  CHECK(curve.population[20] > 0.4999);
  CHECK(curve.population[60] > 0.4999);
  CHECK(curve.population[40] < 1e-6);
  CHECK(curve.population[80] < 1e-5);
}

TEST_CASE("excitation-induced dephasing damps the rabi curve") {
  const auto sp = theta_grid(81);
  const auto curve = simulate_rabi(sp, kKappa, DecoherenceParams{}, noiseless());
  CHECK(curve.expected[40] > curve.expected[0]);
  const double first = curve.expected[20] - curve.expected[40];
  const double second = curve.expected[60] - curve.expected[80];
  CHECK(second < first);
}

TEST_CASE("background control") {
  const auto sp = theta_grid(21);
  const auto m = noiseless();
  SUBCASE("no driven population gives background only") {
    const auto bg = simulate_background_control(sp, kKappa, DecoherenceParams{}, m);
    for (double v : bg.expected) CHECK(v == doctest::Approx(m.background_counts()).epsilon(1e-12));
  }
  SUBCASE("leakage adds a proportional signal") {
    const std::vector<double> pi = {kPi / kKappa};
    const auto bg = simulate_background_control(pi, kKappa, DecoherenceParams::coherent(), m, quasi_delta(), 0.01);
    const double full = m.signal_scale() * 0.5;
    CHECK(bg.expected[0] == doctest::Approx(m.background_counts() + 0.01 * full).epsilon(1e-6));
  }
  SUBCASE("subtraction recovers half the pure-state signal") {
    DecoherenceParams dec;
    const auto mixed = simulate_rabi(sp, kKappa, dec, m);
    const auto pure = simulate_rabi(sp, kKappa, dec, m, {}, DensityMatrix4::diagonal(1, 0, 0, 0));
    const auto bg = simulate_background_control(sp, kKappa, dec, m);
    const auto sub = analysis::subtract_background(sp, mixed.expected, sp, bg.expected);
    for (std::size_t i = 0; i < sp.size(); ++i)
      CHECK(std::abs(sub.y[i] - 0.5 * (pure.expected[i] - m.background_counts())) < 1e-9 * pure.expected[i]);
  }
  CHECK_THROWS_AS(simulate_background_control(sp, kKappa, DecoherenceParams{}, m, {}, 1.5), DomainError);
}

TEST_CASE("ramsey grid") {
  const std::vector<double> coarse = {66.7, 70.03};
  const std::vector<double> fine = {0.0, 1.0, 2.0};
  const auto r = simulate_ramsey(kPi / 2, coarse, fine, 880.0, DecoherenceParams{}, noiseless());
  CHECK(r.expected.size() == 6);
  CHECK(r.phase.size() == 6);
  const std::vector<double> close = {5.0};
  CHECK_THROWS_AS(simulate_ramsey(kPi / 2, close, fine, 880.0, DecoherenceParams{}, noiseless()), DomainError);
}

TEST_CASE("results do not depend on the thread count") {
  const std::vector<double> sp = {0.3, 0.6, 0.9, 1.2, 1.5};
  std::vector<double> fine(17);
  for (std::size_t i = 0; i < fine.size(); ++i) fine[i] = 0.75 * static_cast<double>(i);
  CountModel m;
  m.rng_seed = 5;
  const char* old = std::getenv("QDSIM_THREADS");
  const std::string saved = old ? old : "";
  setenv("QDSIM_THREADS", "1", 1);
  const auto a = simulate_su2_map(sp, fine, 66.0, kKappa, 880.0, DecoherenceParams{}, m);
  setenv("QDSIM_THREADS", "4", 1);
  const auto b = simulate_su2_map(sp, fine, 66.0, kKappa, 880.0, DecoherenceParams{}, m);
  if (old) setenv("QDSIM_THREADS", saved.c_str(), 1); else unsetenv("QDSIM_THREADS");
  CHECK(a.counts == b.counts);
  CHECK(a.population == b.population);
  CHECK(a.timestamps == b.timestamps);
}

TEST_CASE("su2 acquisition order") {
  const std::vector<double> sp = {0.5, 1.0};
  const std::vector<double> fine = {0.0, 1.0, 2.0};
  const auto map = simulate_su2_map(sp, fine, 66.0, kKappa, 880.0, DecoherenceParams{}, noiseless());
  const double t = noiseless().integration_time;
  for (std::size_t i = 0; i < map.timestamps.size(); ++i)
    CHECK(map.timestamps[i] == doctest::Approx(t * static_cast<double>(i)).epsilon(1e-12));
  REQUIRE(map.realized_fine.size() == 6);
  for (std::size_t i = 0; i < 6; ++i) CHECK(map.realized_fine[i] == fine[i % 3]);
}
