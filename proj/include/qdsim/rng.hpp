#pragma once

#include <cstdint>
#include <random>

namespace qdsim {

/// Independent random streams per experiment kind.
enum class StreamDomain : std::uint32_t {
  Rabi = 1,
  Background = 2,
  Ramsey = 3,
  Su2Map = 4,
  Drift = 5,
  ZeemanNoise = 6,
  PolarimetryNoise = 7,
};

/// Generator keyed on (seed, domain, index). The same key always yields the
/// same sequence, so grid points can be sampled in any order.
std::mt19937_64 substream(std::uint64_t seed, StreamDomain domain, std::uint64_t index);

/// One Poisson draw with mean `mean` from the keyed substream.
double poisson_sample(double mean, std::uint64_t seed, StreamDomain domain, std::uint64_t index);

}  // namespace qdsim
