#pragma once

namespace qdsim::constants {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kTwoPi = 2.0 * kPi;

/// Bohr magneton, μeV/T.
inline constexpr double kBohrMagneton = 57.8838;
/// Reduced Planck constant, μeV·ps.
inline constexpr double kHbar = 658.2119;
/// Speed of light, nm/fs.
inline constexpr double kSpeedOfLight = 299.792458;

inline constexpr double kHeNeWavelength = 632.8;  // nm
inline constexpr double kDefaultQdWavelength = 880.0;  // nm, assumed emission wavelength

struct ConstantEntry {
  const char* name;
  double value;
  const char* unit;
};

/// Read-only table of the physical constants used throughout the library.
const ConstantEntry* constants_table(int* count);

}  // namespace qdsim::constants
