#include <cmath>
#include <random>
#include <vector>

#include <doctest.h>

#include "qdsim/error.hpp"
#include "qdsim/interferometer.hpp"

using namespace qdsim;
using namespace qdsim::interferometer;
using constants::kPi;

namespace {

DriftTrace constant_drift(double nm, double duration) {
  DriftTrace d;
  d.timestamps = {0.0, duration};
  d.path_drift = {nm, nm};
  return d;
}

// Periodic stand-in for an SU(2) row: cos² of the QD carrier phase.
double fringe(double delay_fs, double theta) {
  const double phi = 2 * kPi * delay_fs / fringe_period_fs(880.0);
  return std::pow(std::sin(theta), 2) * std::pow(std::cos(phi / 2), 2);
}

struct Synthetic {
  DelayMap raw;
  HeNeTrace hene;
  std::vector<double> axis;
};

// Map whose samples sit at nominal + drift(t), read back through the HeNe trace.
Synthetic synthetic_map(const DriftTrace& drift, std::size_t rows, std::size_t cols, double dt, double t0 = 0.0,
                        double span = 12.0) {
  Synthetic s;
  for (std::size_t c = 0; c < cols; ++c) s.axis.push_back(span * static_cast<double>(c) / static_cast<double>(cols - 1));
  s.raw.fine_delay = s.axis;
  for (std::size_t r = 0; r < rows; ++r) {
    const double theta = kPi * static_cast<double>(r + 1) / static_cast<double>(rows + 1);
    s.raw.sqrt_power.push_back(theta);
    for (std::size_t c = 0; c < cols; ++c) {
      const double t = t0 + dt * static_cast<double>(r * cols + c);
      s.raw.timestamps.push_back(t);
      s.raw.values.push_back(fringe(s.axis[c] + drift.at(t) / constants::kSpeedOfLight, theta));
    }
  }
  s.hene = hene_wrapped_phase(drift);
  return s;
}

}  // namespace

TEST_CASE("drift generator") {
  SUBCASE("no drift") {
    const auto d = generate_drift(100.0, 11, 0.0, 0.0, 3);
    for (double v : d.path_drift) CHECK(v == 0.0);
  }
  SUBCASE("linear ramp") {
    const auto d = generate_drift(14400.0, 14401, 0.0, 0.05, 3);
    CHECK(d.path_drift.back() == doctest::Approx(720.0).epsilon(1e-12));
    CHECK(d.timestamps.back() == 14400.0);
    CHECK(d.at(7200.0) == doctest::Approx(360.0).epsilon(1e-12));
  }
  SUBCASE("fixed seed is reproducible") {
    const auto a = generate_drift(1000.0, 1001, 0.5, 0.1, 17);
    const auto b = generate_drift(1000.0, 1001, 0.5, 0.1, 17);
    const auto c = generate_drift(1000.0, 1001, 0.5, 0.1, 18);
    CHECK(a.path_drift == b.path_drift);
    CHECK(a.path_drift != c.path_drift);
  }
  SUBCASE("random walk variance grows linearly") {
    double sum = 0.0;
    const int n = 400;
    for (int s = 0; s < n; ++s) {
      const double end = generate_drift(100.0, 101, 0.5, 0.0, static_cast<std::uint64_t>(s)).path_drift.back();
      sum += end * end;
    }
    CHECK(sum / n == doctest::Approx(0.25 * 100.0).epsilon(0.2));
  }
  CHECK_THROWS_AS(generate_drift(-1.0, 10, 0.0, 0.0, 1), DomainError);
}

TEST_CASE("hene phase") {
  auto phase_of = [](double nm) { return hene_wrapped_phase(constant_drift(nm, 1.0)).wrapped_phase[0]; };
  CHECK(phase_of(0.0) == 0.0);
  CHECK(std::abs(phase_of(632.8)) < 1e-12);
  CHECK(phase_of(158.2) == doctest::Approx(kPi / 2).epsilon(1e-12));
  CHECK(hene_wrapped_phase(constant_drift(158.2, 1.0), 632.8, -1).wrapped_phase[0] ==
        doctest::Approx(-kPi / 2).epsilon(1e-12));
}

TEST_CASE("wrap and unwrap") {
  CHECK(wrap_phase(kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(-kPi) == doctest::Approx(kPi));
  CHECK(wrap_phase(3 * kPi / 2) == doctest::Approx(-kPi / 2));

  const std::vector<double> flat(5, 1.25);
  CHECK(unwrap_phase(flat) == flat);

  const std::vector<double> jump = {3.0, -3.0};
  const auto u = unwrap_phase(jump);
  CHECK(u[0] == 3.0);
  CHECK(u[1] == doctest::Approx(3.2832).epsilon(1e-5));

  std::vector<double> ramp(100), wrapped(100);
  for (std::size_t i = 0; i < ramp.size(); ++i) {
    ramp[i] = 6 * kPi * static_cast<double>(i) / 99.0;
    wrapped[i] = wrap_phase(ramp[i]);
  }
  const auto back = unwrap_phase(wrapped);
  for (std::size_t i = 0; i < ramp.size(); ++i) CHECK(std::abs(back[i] - ramp[i]) < 1e-12);
}

TEST_CASE("unwrap recovers any adequately sampled sequence") {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> step(-0.9 * kPi, 0.9 * kPi);
  std::uniform_real_distribution<double> start(-3.0, 3.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> x(500), w(500);
    x[0] = start(gen);
    for (std::size_t i = 1; i < x.size(); ++i) x[i] = x[i - 1] + step(gen);
    for (std::size_t i = 0; i < x.size(); ++i) w[i] = wrap_phase(x[i]);
    const auto u = unwrap_phase(w);
    for (std::size_t i = 0; i < x.size(); ++i) CHECK(std::abs(u[i] - x[i]) < 1e-9);
  }
}

TEST_CASE("phase to delay") {
  CHECK(drift_to_delay(2 * kPi) == doctest::Approx(2.1108).epsilon(1e-4));
  CHECK(drift_to_delay(0.0) == 0.0);
  for (double a : {-2.0, 0.5, 3.0}) CHECK(drift_to_delay(a * 1.7) == doctest::Approx(a * drift_to_delay(1.7)));
  CHECK(fringe_period_fs(880.0) == doctest::Approx(2.9353).epsilon(1e-4));
  // As a QD phase, one HeNe radian is 632.8/880 rad.
  CHECK(2 * kPi * drift_to_delay(1.0) / fringe_period_fs(880.0) == doctest::Approx(0.7191).epsilon(1e-4));
}

TEST_CASE("correction without drift is the identity") {
  const auto s = synthetic_map(constant_drift(0.0, 1e4), 4, 33, 1.0);
  const auto out = correct_su2_map(s.raw, s.hene, s.axis);
  CHECK(out.n_missing == 0);
  CHECK(out.map.values == s.raw.values);
  const auto again = correct_su2_map(out.map, s.hene, s.axis);
  CHECK(again.map.values == out.map.values);
}

TEST_CASE("correction undoes a linear drift") {
  DriftTrace drift;
  for (int i = 0; i <= 400; ++i) {
    drift.timestamps.push_back(i * 1.0);
    drift.path_drift.push_back(1.8 * i);  // 720 nm over the map
  }
  const auto s = synthetic_map(drift, 4, 100, 1.0);
  const auto out = correct_su2_map(s.raw, s.hene, s.axis, 632.8, 1, fringe_period_fs(880.0));
  CHECK(out.n_missing == 0);
  double worst = 0.0;
  for (std::size_t r = 0; r < s.raw.rows(); ++r)
    for (std::size_t c = 0; c < s.raw.cols(); ++c)
      worst = std::max(worst, std::abs(out.map.at(r, c) - fringe(s.axis[c], s.raw.sqrt_power[r])));
  CHECK(worst < 0.02);

  const auto unfolded = correct_su2_map(s.raw, s.hene, s.axis);
  CHECK(unfolded.n_missing > 0);
  for (std::size_t k = 0; k < unfolded.map.values.size(); ++k)
    if (std::isnan(unfolded.map.values[k])) continue;
    else CHECK(std::abs(unfolded.map.values[k] - out.map.values[k]) < 1e-12);
}

TEST_CASE("one fringe of drift is invisible on a periodic map") {
  // Path length ramps by one QD wavelength before acquisition starts at t = 200 s.
  DriftTrace drift;
  for (int i = 0; i <= 1000; ++i) {
    drift.timestamps.push_back(i * 1.0);
    drift.path_drift.push_back(880.0 * std::min(1.0, i / 100.0));
  }
  // Ten grid steps per fringe, so shifted samples land on grid nodes.
  const double span = 4 * fringe_period_fs(880.0);
  const auto s = synthetic_map(drift, 3, 41, 1.0, 200.0, span);
  const auto flat = synthetic_map(constant_drift(0.0, 1e4), 3, 41, 1.0, 0.0, span);
  for (std::size_t k = 0; k < s.raw.values.size(); ++k)
    CHECK(s.raw.values[k] == doctest::Approx(flat.raw.values[k]).epsilon(1e-9));
  const auto out = correct_su2_map(s.raw, s.hene, s.axis, 632.8, 1, fringe_period_fs(880.0));
  CHECK(out.n_missing == 0);
  for (std::size_t k = 0; k < s.raw.values.size(); ++k) CHECK(std::abs(out.map.values[k] - flat.raw.values[k]) < 1e-9);
}

TEST_CASE("correction only moves samples") {
  // A drift of exactly one grid step shifts every sample by one column.
  auto s = synthetic_map(constant_drift(0.0, 1e4), 2, 25, 1.0);
  const double step = s.axis[1] - s.axis[0];
  const auto drift = constant_drift(step * constants::kSpeedOfLight, 1e4);
  std::mt19937_64 gen(3);
  std::uniform_real_distribution<double> u(0.0, 100.0);
  for (auto& v : s.raw.values) v = u(gen);
  const auto out = correct_su2_map(s.raw, hene_wrapped_phase(drift, 632.8), s.axis);
  for (std::size_t r = 0; r < 2; ++r) {
    CHECK(std::isnan(out.map.at(r, 0)));
    for (std::size_t c = 1; c < 25; ++c) CHECK(out.map.at(r, c) == doctest::Approx(s.raw.at(r, c - 1)).epsilon(1e-9));
  }
  CHECK(out.n_missing == 2);
}

TEST_CASE("hene trace must cover the acquisition") {
  const auto s = synthetic_map(constant_drift(0.0, 1e4), 2, 9, 1.0);
  const auto short_hene = hene_wrapped_phase(constant_drift(0.0, 10.0));
  CHECK_THROWS_AS(correct_su2_map(s.raw, short_hene, s.axis), DomainError);
}

TEST_CASE("delay schedule") {
  DelaySchedule d;
  const auto coarse = d.coarse_delays();
  REQUIRE(coarse.size() == 21);
  CHECK(coarse.front() == 66.7);
  CHECK(coarse.back() == doctest::Approx(66.7 + 20 * 3.33));
  const auto fine = d.fine_delays();
  REQUIRE(fine.size() == 64);
  CHECK(fine.back() - fine.front() == doctest::Approx(12.0));
}
