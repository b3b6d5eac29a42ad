#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include <doctest.h>

#include "qdsim/error.hpp"
#include "qdsim/evolve.hpp"
#include "qdsim/pulse.hpp"

using namespace qdsim;
using namespace qdsim::dynamics;
using constants::kPi;

namespace {

DensityMatrix4 pure_ground() { return DensityMatrix4::diagonal(1, 0, 0, 0); }

// R acting on the driven leg {g−, t−} of the 4×4 state.
DensityMatrix4 apply_delta(const DensityMatrix4& rho, double theta, double phi) {
  const Eigen::Matrix2cd r = delta_pulse_propagator(theta, phi);
  Eigen::Matrix4cd u = Eigen::Matrix4cd::Identity();
  u(kGroundMinus, kGroundMinus) = r(0, 0);
  u(kGroundMinus, kTrionMinus) = r(0, 1);
  u(kTrionMinus, kGroundMinus) = r(1, 0);
  u(kTrionMinus, kTrionMinus) = r(1, 1);
  return DensityMatrix4(u * rho.matrix() * u.adjoint());
}

PulseSequence single(double area, double fwhm) {
  PulseSequence s;
  s.pulses = {PulseSpec{area, fwhm, 0.0, 0.0, 0.0}};
  return s;
}

DecoherenceParams lifetime_only(double t1) { return {t1, 0.5, 0.0, 0.0}; }

}  // namespace

TEST_CASE("pulse area from power") {
  CHECK(area_from_sqrt_power(0.0, 5.0) == 0.0);
  const double kappa = 4 * kPi / 2.5;
  CHECK(kappa == doctest::Approx(5.0265).epsilon(1e-5));
  CHECK(area_from_sqrt_power(0.625, kappa) == doctest::Approx(kPi).epsilon(1e-15));
  CHECK(area_from_sqrt_power(2.5, kappa) == doctest::Approx(4 * kPi).epsilon(1e-15));
  CHECK_THROWS_AS(area_from_sqrt_power(-1.0, kappa), DomainError);
  CHECK_THROWS_AS(area_from_sqrt_power(1.0, 0.0), DomainError);
}

TEST_CASE("gaussian envelope") {
  const GaussianEnvelope env(PulseSpec{kPi, 3.0, 0.0, 0.0, 0.0});
  CHECK(env.sigma() == doctest::Approx(1.27398).epsilon(1e-5));
  CHECK(env.peak() == doctest::Approx(0.98378).epsilon(1e-5));

  const GaussianEnvelope zero(PulseSpec{0.0, 3.0, 0.0, 0.0, 0.0});
  for (double t : {-5.0, 0.0, 2.0}) CHECK(zero(t) == 0.0);

  // Composite Simpson; ±6σ misses erfc(6/√2) = 2e-9 of the area, ±8σ does not.
  auto simpson = [&](double half_width) {
    const int n = 20000;
    const double a = -half_width, h = 2 * half_width / n;
    double sum = env(a) + env(a + n * h);
    for (int i = 1; i < n; ++i) sum += (i % 2 ? 4.0 : 2.0) * env(a + i * h);
    return sum * h / 3;
  };
  const double s = env.sigma();
  CHECK(simpson(6 * s) == doctest::Approx(kPi * std::erf(6 / std::sqrt(2.0))).epsilon(1e-12));
  CHECK(std::abs(simpson(8 * s) - kPi) < 1e-9);
}

TEST_CASE("pulse validation") {
  CHECK_THROWS_AS(PulseSpec({kPi, 0.0, 0.0, 0.0, 0.0}).validate(), DomainError);
  CHECK_THROWS_AS(PulseSpec({-1.0, 3.0, 0.0, 0.0, 0.0}).validate(), DomainError);
  auto seq = two_pulse_sequence(kPi / 2, 3.0, 5.0, 0.0, 880.0);
  CHECK_THROWS_AS(seq.require_interference_free(), DomainError);
  seq = two_pulse_sequence(kPi / 2, 3.0, 66.0, 0.0, 880.0);
  CHECK_NOTHROW(seq.require_interference_free());
}

TEST_CASE("optical phase") {
  CHECK(optical_phase(0.0, 880.0) == 0.0);
  const double period = 880.0 / constants::kSpeedOfLight;
  CHECK(optical_phase(period / 4, 880.0) == doctest::Approx(kPi / 2).epsilon(1e-12));
  const double p = optical_phase(10 * period + 1.0, 880.0);
  CHECK(p >= 0.0);
  CHECK(p < 2 * kPi);
}

TEST_CASE("delta propagator") {
  const Eigen::Matrix2cd id = delta_pulse_propagator(0.0, 1.3);
  CHECK((id - Eigen::Matrix2cd::Identity()).norm() == 0.0);

  const Eigen::Vector2cd g(1.0, 0.0);
  CHECK(std::norm((delta_pulse_propagator(kPi, 0.0) * g)(1)) == doctest::Approx(1.0).epsilon(1e-15));

  for (double theta : {0.3, kPi / 2, 2.0})
    for (double phi2 : {0.0, 0.7, kPi / 2, kPi, 4.0}) {
      const Eigen::Vector2cd out = delta_pulse_propagator(theta, phi2) * delta_pulse_propagator(theta, 0.0) * g;
      const double expect = std::pow(std::sin(theta), 2) * std::pow(std::cos(phi2 / 2), 2);
      CHECK(std::norm(out(1)) == doctest::Approx(expect).epsilon(1e-14));
    }
  const Eigen::Vector2cd half = delta_pulse_propagator(kPi / 2, kPi / 2) * delta_pulse_propagator(kPi / 2, 0.0) * g;
  CHECK(std::norm(half(1)) == doctest::Approx(0.5).epsilon(1e-14));

  const Eigen::Matrix2cd r = delta_pulse_propagator(1.1, 0.4);
  CHECK((r.adjoint() * r - Eigen::Matrix2cd::Identity()).norm() < 1e-15);
}

TEST_CASE("randomized ground state") {
  const auto rho = randomized_ground_state();
  CHECK(rho.trace() == 1.0);
  CHECK(rho.population(kGroundMinus) == 0.5);
  CHECK(rho.population(kGroundPlus) == 0.5);
  CHECK(rho.purity() == doctest::Approx(0.5));
}

TEST_CASE("free evolution") {
  const auto rho0 = apply_delta(pure_ground(), kPi / 2, 0.3);

  SUBCASE("no decoherence leaves the state unchanged") {
    const auto out = free_evolution(rho0, 1e6, DecoherenceParams::coherent());
    CHECK((out.matrix() - rho0.matrix()).norm() == 0.0);
  }
  SUBCASE("pure dephasing decays the coherence exponentially") {
    DecoherenceParams dec{std::numeric_limits<double>::infinity(), 0.5, 1.0 / 51.0, 0.0};
    for (double tau : {0.0, 10.0, 66.7, 200.0}) {
      const auto out = free_evolution(rho0, tau, dec);
      const auto c0 = rho0.matrix()(kGroundMinus, kTrionMinus);
      const auto c = out.matrix()(kGroundMinus, kTrionMinus);
      CHECK(std::abs(c - c0 * std::exp(-tau / 51.0)) < 1e-15);
      CHECK(out.population(kTrionMinus) == rho0.population(kTrionMinus));
    }
  }
  SUBCASE("lifetime decay conserves trace and feeds both ground states") {
    const auto out = free_evolution(rho0, 500.0, lifetime_only(1000.0));
    CHECK(out.trace() == doctest::Approx(1.0).epsilon(1e-15));
    CHECK(out.population(kTrionMinus) == doctest::Approx(0.5 * std::exp(-0.5)).epsilon(1e-13));
    CHECK(out.population(kGroundPlus) > 0.0);
  }
}

TEST_CASE("ramsey contrast follows the dephasing exponential") {
  // Delta pulses separated by free evolution: P = ½[1 + e^{−γτ} cos φ].
  const double gamma = 1.0 / 51.0;
  DecoherenceParams dec{std::numeric_limits<double>::infinity(), 0.5, gamma, 0.0};
  for (double tau : {0.0, 20.0, 66.7, 100.0})
    for (double phi : {0.0, 1.0, kPi / 2, kPi, 5.0}) {
      auto rho = apply_delta(pure_ground(), kPi / 2, 0.0);
      rho = free_evolution(rho, tau, dec);
      rho = apply_delta(rho, kPi / 2, phi);
      const double expect = 0.5 * (1 + std::exp(-gamma * tau) * std::cos(phi));
      CHECK(rho.population(kTrionMinus) == doctest::Approx(expect).epsilon(1e-9));
    }
}

TEST_CASE("quasi-delta pulse matches the delta propagator") {
  const double fwhm = 0.03;
  const auto dec = DecoherenceParams::coherent();
  SUBCASE("pi pulse inverts") {
    const auto out = evolve(pure_ground(), single(kPi, fwhm), dec, fwhm / 50);
    CHECK(out.population(kTrionMinus) == doctest::Approx(1.0).epsilon(1e-4));
  }
  SUBCASE("every matrix entry") {
    const auto rho0 = randomized_ground_state();
    for (double theta : {kPi / 3, kPi / 2, 2.2}) {
      const auto out = evolve(rho0, single(theta, fwhm), dec, fwhm / 50);
      const auto ref = apply_delta(rho0, theta, 0.0);
      CHECK((out.matrix() - ref.matrix()).cwiseAbs().maxCoeff() < 1e-4);
    }
  }
  SUBCASE("two pi returns to ground") {
    const auto out = evolve(pure_ground(), single(2 * kPi, fwhm), dec, fwhm / 50);
    CHECK(out.trion_population() < 1e-6);
  }
}

TEST_CASE("finite pulse loses a little to radiative decay") {
  // The pulse acts within about ±3σ; read the population there and at the
  // window end (+6σ), where a further 3σ of free decay has elapsed.
  EvolveOptions opts;
  opts.trajectory_stride = 1;
  const auto seq = single(kPi, 3.0);
  const auto res = evolve_traced(pure_ground(), seq, lifetime_only(1000.0), opts);
  const double s = seq.pulses[0].sigma();
  const TrajectoryPoint* at = nullptr;
  for (const auto& p : res.trajectory)
    if (!at || std::abs(p.t - 3 * s) < std::abs(at->t - 3 * s)) at = &p;
  REQUIRE(at != nullptr);
  const double p3 = at->rho.population(kTrionMinus);
  CHECK(p3 == doctest::Approx(0.9963).epsilon(0.0015 / 0.9963));
  const double end = res.rho.population(kTrionMinus);
  CHECK(end == doctest::Approx(p3 * std::exp(-(6 * s - at->t) / 1000.0)).epsilon(1e-4));
  CHECK(end < p3);
}

TEST_CASE("time step checks") {
  CHECK_THROWS_AS(evolve(pure_ground(), single(kPi, 3.0), lifetime_only(1000.0), 0.1), DomainError);

  DecoherenceParams dec;
  const auto seq = two_pulse_sequence(kPi / 2, 3.0, 20.0, 1.0, 880.0);
  const auto a = evolve(randomized_ground_state(), seq, dec, 0.005);
  const auto b = evolve(randomized_ground_state(), seq, dec, 0.0025);
  for (int l = 0; l < 4; ++l) CHECK(std::abs(a.population(Level(l)) - b.population(Level(l))) < 1e-6);
}

TEST_CASE("invariants along a trajectory") {
  EvolveOptions opts;
  opts.trajectory_stride = 10;
  InvariantMonitor monitor;
  opts.monitor = &monitor;
  DecoherenceParams dec;
  const auto res = evolve_traced(randomized_ground_state(), two_pulse_sequence(3.0, 3.0, 15.0, 0.0, 880.0), dec, opts);
  REQUIRE(res.trajectory.size() > 10);
  for (const auto& p : res.trajectory) {
    const auto c = p.rho.check();
    CHECK(c.trace_error < 1e-9);
    CHECK(c.hermiticity_error < 1e-12);
    CHECK(c.min_eigenvalue > -1e-9);
  }
  CHECK(monitor.states() > 0);
  CHECK(monitor.max_trace_error() < 1e-9);
  CHECK(monitor.min_eigenvalue() > -1e-9);
}

TEST_CASE("batched evolution does not depend on the batching") {
  DecoherenceParams dec;
  std::vector<PulseSequence> seqs;
  for (int i = 0; i < 7; ++i) seqs.push_back(two_pulse_sequence(0.4 * (i + 1), 3.0, 30.0, 0.5 * i, 880.0));
  std::vector<DensityMatrix4> rho0(seqs.size(), randomized_ground_state());
  EvolveOptions opts;
  const auto all = evolve_batch(rho0, seqs, dec, opts);
  for (std::size_t i = 0; i < seqs.size(); ++i) {
    const auto one = evolve_batch(std::span(rho0).subspan(i, 1), std::span(seqs).subspan(i, 1), dec, opts);
    CHECK(one[0].matrix() == all[i].matrix());
  }
}
