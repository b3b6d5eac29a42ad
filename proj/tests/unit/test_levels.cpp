#include <algorithm>
#include <array>
#include <cmath>

#include <doctest.h>

#include "qdsim/error.hpp"
#include "qdsim/levels.hpp"

using namespace qdsim;
using namespace qdsim::levels;

namespace {

constexpr double kE0 = 1408911.3;

MagnetoParams defaults() {
  MagnetoParams p;
  p.e0 = kE0;
  return p;
}

}  // namespace

TEST_CASE("zero field gives four degenerate lines at E0") {
  const auto lines = transition_energies(defaults(), 0.0);
  for (const auto& l : lines) CHECK(l.energy == kE0);
}

TEST_CASE("diamagnetic shift at 5 T is 400 ueV") {
  const auto p = defaults();
  const double mean = (line_energy(p, 5.0, 1, 1) + line_energy(p, 5.0, -1, -1)) / 2;
  CHECK(mean - kE0 == doctest::Approx(400.0).epsilon(1e-12));
}

TEST_CASE("fan offsets at 5 T") {
  // Frozen from E0 + γB² + (s_e g_e + s_h g_h)μ_B B/2 with μ_B = 57.8838 μeV/T.
  const std::array<double, 4> expected = {185.82994, 342.1162, 457.8838, 614.17006};
  const auto lines = transition_energies(defaults(), 5.0);
  for (std::size_t i = 0; i < 4; ++i) CHECK(lines[i].energy - kE0 == doctest::Approx(expected[i]).epsilon(1e-9));
  for (std::size_t i = 1; i < 4; ++i) CHECK(lines[i].energy > lines[i - 1].energy);
}

TEST_CASE("negative field is rejected") { CHECK_THROWS_AS(transition_energies(defaults(), -1.0), DomainError); }

TEST_CASE("sum rule holds exactly") {
  const auto p = defaults();
  for (double b : {0.0, 0.3, 1.0, 2.5, 5.0, 9.0}) {
    const double outer = line_energy(p, b, 1, 1) + line_energy(p, b, -1, -1);
    const double inner = line_energy(p, b, 1, -1) + line_energy(p, b, -1, 1);
    const double centre = 2 * (p.e0 + p.gamma * b * b);
    CHECK(outer == doctest::Approx(centre).epsilon(1e-15));
    CHECK(inner == doctest::Approx(centre).epsilon(1e-15));
  }
}

TEST_CASE("pair splittings are linear in field") {
  const auto p = defaults();
  const double h = 0.25;
  for (double b = 0.0; b <= 6.0; b += h) {
    const double outer = line_energy(p, b, 1, 1) - line_energy(p, b, -1, -1);
    const double inner = std::abs(line_energy(p, b, -1, 1) - line_energy(p, b, 1, -1));
    CHECK(outer == doctest::Approx((p.g_e + p.g_h) * p.mu_b * b).epsilon(1e-9));
    CHECK(inner == doctest::Approx(std::abs(p.g_e - p.g_h) * p.mu_b * b).epsilon(1e-9));
    const double next = line_energy(p, b + h, 1, 1) - line_energy(p, b + h, -1, -1);
    CHECK((next - outer) / h == doctest::Approx((p.g_e + p.g_h) * p.mu_b).epsilon(1e-9));
  }
}

TEST_CASE("hole mixing coefficients") {
  auto m = hole_mixing(0.0);
  CHECK(m.c1 == doctest::Approx(1.0));
  CHECK(m.c2 == doctest::Approx(0.0));
  m = hole_mixing(constants::kPi);
  CHECK(m.c1 == doctest::Approx(0.0));
  CHECK(m.c2 == doctest::Approx(1.0));
  m = hole_mixing(constants::kPi / 2);
  CHECK(m.c1 == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK(m.c2 == doctest::Approx(0.70711).epsilon(1e-5));
  CHECK_THROWS_AS(hole_mixing(-0.1), DomainError);
  CHECK_THROWS_AS(hole_mixing(4.0), DomainError);
}

TEST_CASE("line polarizations") {
  const auto mix = hole_mixing(constants::kPi / 2);
  SUBCASE("ideal circular") {
    const auto s = line_polarizations(mix, 1.0);
    for (const auto& v : s) {
      CHECK(v.s0 == 1.0);
      CHECK(v.s1 == 0.0);
      CHECK(v.s2 == 0.0);
      CHECK(std::abs(v.s3) == 1.0);
    }
    // Lines sharing a trion state have opposite helicity.
    CHECK(s[0].s3 == -s[1].s3);
    CHECK(s[2].s3 == -s[3].s3);
  }
  SUBCASE("measured floor") {
    for (const auto& v : line_polarizations(mix, 0.93)) CHECK(std::abs(v.s3) == doctest::Approx(0.93));
  }
  SUBCASE("unpolarized") {
    for (const auto& v : line_polarizations(mix, 0.0)) {
      CHECK(v.s3 == 0.0);
      CHECK(v.polarized_norm() == 0.0);
    }
  }
  SUBCASE("always physical") {
    for (double chi : {0.0, 0.5, constants::kPi / 2, 2.0, constants::kPi})
      for (double d : {0.0, 0.3, 0.93, 1.0})
        for (const auto& v : line_polarizations(hole_mixing(chi), d)) CHECK(v.physical(1e-15));
  }
}

TEST_CASE("role assignment at 5 T") {
  const auto lines = assign_roles(transition_energies(defaults(), 5.0));
  CHECK(lines[0].role == LineRole::Driven);
  CHECK(lines[0].energy - kE0 == doctest::Approx(185.82994));
  CHECK(lines[2].role == LineRole::Detected);
  CHECK(lines[2].energy - kE0 == doctest::Approx(457.8838));
  CHECK(lines[1].role == LineRole::Other);
  CHECK(lines[3].role == LineRole::Other);
}

TEST_CASE("role assignment is permutation invariant") {
  auto base = transition_energies(defaults(), 3.0);
  const auto reference = assign_roles(base);
  std::sort(base.begin(), base.end(), [](const auto& a, const auto& b) { return a.energy < b.energy; });
  std::array<int, 4> idx = {0, 1, 2, 3};
  do {
    LineSet shuffled;
    for (std::size_t i = 0; i < 4; ++i) shuffled[i] = base[static_cast<std::size_t>(idx[i])];
    const auto got = assign_roles(shuffled);
    for (std::size_t i = 0; i < 4; ++i) {
      CHECK(got[i].energy == reference[i].energy);
      CHECK(got[i].role == reference[i].role);
    }
  } while (std::next_permutation(idx.begin(), idx.end()));
}

TEST_CASE("degenerate lines cannot be assigned") {
  CHECK_THROWS_AS(assign_roles(transition_energies(defaults(), 0.0)), NumericError);
  auto p = defaults();
  p.g_h = p.g_e;
  CHECK_THROWS_AS(assign_roles(transition_energies(p, 5.0)), NumericError);
}

TEST_CASE("resolvability") {
  const auto p = defaults();
  auto v = resolvability_check(assign_roles(transition_energies(p, 5.0)), 8.0);
  CHECK(v.pass);
  CHECK(v.min_separation == doctest::Approx(115.7676).epsilon(1e-9));
  // Inner splitting 0.40·57.8838·0.3456 sits on the 8 μeV boundary.
  v = resolvability_check(assign_roles(transition_energies(p, 0.3456)), 8.0);
  CHECK(v.pass);
  CHECK(v.min_separation == doctest::Approx(8.0).epsilon(1e-3));
  v = resolvability_check(transition_energies(p, 0.0), 8.0);
  CHECK_FALSE(v.pass);
}
