#include "qdsim/constants.hpp"

namespace qdsim::constants {

namespace {
constexpr ConstantEntry kTable[] = {
    {"mu_B", kBohrMagneton, "ueV/T"},
    {"hbar", kHbar, "ueV*ps"},
    {"c", kSpeedOfLight, "nm/fs"},
    {"lambda_hene", kHeNeWavelength, "nm"},
};
}  // namespace

const ConstantEntry* constants_table(int* count) {
  if (count) *count = static_cast<int>(sizeof(kTable) / sizeof(kTable[0]));
  return kTable;
}

}  // namespace qdsim::constants
