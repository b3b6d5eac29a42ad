#include "qdsim/rng.hpp"

#include "qdsim/error.hpp"

namespace qdsim {

std::mt19937_64 substream(std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(domain), static_cast<std::uint32_t>(index),
                    static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

double poisson_sample(double mean, std::uint64_t seed, StreamDomain domain, std::uint64_t index) {
  if (!(mean >= 0.0)) throw DomainError("Poisson mean must be >= 0");
  if (mean == 0.0) return 0.0;
  auto gen = substream(seed, domain, index);
  std::poisson_distribution<long long> dist(mean);
  return static_cast<double>(dist(gen));
}

}  // namespace qdsim
