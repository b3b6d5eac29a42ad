#include <cstring>
#include <random>
#include <vector>

#include <doctest.h>

#include "qdsim/error.hpp"
#include "qdsim/evolve.hpp"
#include "qdsim/pulse.hpp"
#include "qdsim/simd/lindblad_kernel.hpp"

using namespace qdsim;
using namespace qdsim::simd;

namespace {

std::array<LaneState, kBatch> random_lanes(std::mt19937_64& gen) {
  std::uniform_real_distribution<double> u(-0.5, 0.5);
  std::array<LaneState, kBatch> lanes{};
  for (auto& l : lanes)
    for (auto& v : l) v = u(gen);
  return lanes;
}

bool bitwise_equal(const std::array<LaneState, kBatch>& a, const std::array<LaneState, kBatch>& b) {
  return std::memcmp(a.data(), b.data(), sizeof(a)) == 0;
}

}  // namespace

TEST_CASE("scalar kernel is always available") {
  CHECK(isa_available(KernelIsa::Scalar));
  CHECK(kernel_for(KernelIsa::Scalar) != nullptr);
  CHECK(isa_name(KernelIsa::Scalar) == "scalar");
  CHECK(isa_name(KernelIsa::Avx2) == "avx2");
}

TEST_CASE("unavailable kernels are refused") {
  if (!isa_available(KernelIsa::Avx2)) CHECK_THROWS_AS(kernel_for(KernelIsa::Avx2), DomainError);
}

TEST_CASE("avx2 window kernel matches scalar bitwise") {
  if (!isa_available(KernelIsa::Avx2)) {
    MESSAGE("AVX2 not available on this CPU; equivalence not exercised");
    return;
  }
  std::mt19937_64 gen(42);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 20; ++trial) {
    const std::size_t n_steps = 50 + 13 * static_cast<std::size_t>(trial);
    std::vector<double> re((2 * n_steps + 1) * kBatch), im(re.size());
    for (auto& v : re) v = u(gen);
    for (auto& v : im) v = u(gen);
    DriveBlock drive{re.data(), im.data(), 0, n_steps, 0.005, kBatch};
    LindbladRates rates{1e-3 * (trial + 1), 5e-4, 0.02, 0.02 * (trial % 2), 0.1 * (trial % 3)};
    auto a = random_lanes(gen);
    auto b = a;
    kernel_for(KernelIsa::Scalar)(a, drive, rates);
    kernel_for(KernelIsa::Avx2)(b, drive, rates);
    CHECK(bitwise_equal(a, b));
  }
}

TEST_CASE("full evolution agrees across kernels") {
  if (!isa_available(KernelIsa::Avx2)) return;
  dynamics::DecoherenceParams dec;
  std::vector<dynamics::PulseSequence> seqs;
  for (int i = 0; i < 9; ++i) seqs.push_back(dynamics::two_pulse_sequence(0.5 + 0.3 * i, 3.0, 40.0, 0.7 * i, 880.0));
  std::vector<dynamics::DensityMatrix4> rho0(seqs.size(), dynamics::randomized_ground_state());
  dynamics::EvolveOptions scalar, avx;
  scalar.isa = KernelIsa::Scalar;
  avx.isa = KernelIsa::Avx2;
  const auto a = dynamics::evolve_batch(rho0, seqs, dec, scalar);
  const auto b = dynamics::evolve_batch(rho0, seqs, dec, avx);
  for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i].matrix() == b[i].matrix());
}

TEST_CASE("lane round trip") {
  auto rho = dynamics::randomized_ground_state();
  rho.matrix()(0, 2) = {0.1, -0.2};
  rho.matrix()(2, 0) = {0.1, 0.2};
  const auto back = dynamics::DensityMatrix4::from_lane(rho.to_lane());
  CHECK(back.matrix() == rho.matrix());
}
