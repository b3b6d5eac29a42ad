#include "qdsim/levels.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "qdsim/error.hpp"

namespace qdsim::levels {

void MagnetoParams::validate() const {
  if (!(gamma >= 0.0)) throw DomainError("diamagnetic coefficient must be >= 0");
  if (!std::isfinite(g_e) || !std::isfinite(g_h) || !std::isfinite(e0))
    throw DomainError("g-factors and E0 must be finite");
}

double line_energy(const MagnetoParams& p, double b, int s_e, int s_h) {
  const double zeeman = (s_e * p.g_e + s_h * p.g_h) * MagnetoParams::mu_b * b / 2.0;
  return p.e0 + p.gamma * b * b + zeeman;
}

LineSet transition_energies(const MagnetoParams& p, double b) {
  if (!(b >= 0.0)) throw DomainError("field must be >= 0, got " + std::to_string(b));
  LineSet lines;
  int k = 0;
  for (int s_e : {-1, 1}) {
    for (int s_h : {-1, 1}) {
      lines[k].s_e = s_e;
      lines[k].s_h = s_h;
      lines[k].energy = line_energy(p, b, s_e, s_h);
      ++k;
    }
  }
  std::stable_sort(lines.begin(), lines.end(),
                   [](const TransitionLine& a, const TransitionLine& b) { return a.energy < b.energy; });
  return lines;
}

HoleMixing hole_mixing(double chi) {
  if (!(chi >= 0.0 && chi <= constants::kPi))
    throw DomainError("mixing angle must lie in [0, pi]");
  return {chi, std::cos(chi / 2), std::sin(chi / 2)};
}

std::array<StokesVector, 4> line_polarizations(const HoleMixing& mixing, double docp) {
  if (!(docp >= 0.0 && docp <= 1.0)) throw DomainError("docp must lie in [0, 1]");
  if (std::abs(mixing.c1 * mixing.c1 + mixing.c2 * mixing.c2 - 1.0) > 1e-12)
    throw DomainError("hole mixing coefficients are not normalized");
  std::array<StokesVector, 4> out;
  int k = 0;
  for (int s_e : {-1, 1}) {
    for (int s_h : {-1, 1}) {
      out[k++] = StokesVector{1.0, 0.0, 0.0, s_e * s_h * docp};
    }
  }
  return out;
}

void apply_polarizations(LineSet& lines, const HoleMixing& mixing, double docp) {
  const auto stokes = line_polarizations(mixing, docp);
  for (auto& line : lines) {
    const int idx = (line.s_e > 0 ? 2 : 0) + (line.s_h > 0 ? 1 : 0);
    line.stokes = stokes[idx];
  }
}

LineSet assign_roles(LineSet lines, double epsilon) {
  // Sort on the full key so the outcome does not depend on input order.
  std::sort(lines.begin(), lines.end(), [](const TransitionLine& a, const TransitionLine& b) {
    if (a.energy != b.energy) return a.energy < b.energy;
    if (a.s_e != b.s_e) return a.s_e < b.s_e;
    return a.s_h < b.s_h;
  });
  for (std::size_t i = 0; i < lines.size(); ++i) {
    for (std::size_t j = i + 1; j < lines.size(); ++j) {
      if (std::abs(lines[i].energy - lines[j].energy) < epsilon)
        throw NumericError("degenerate transition lines; roles cannot be assigned");
    }
  }
  for (auto& line : lines) line.role = LineRole::Other;
  // Lines are symmetric about E0 + γB², so sorted slots 1 and 2 form the inner pair.
  lines[0].role = LineRole::Driven;
  lines[2].role = LineRole::Detected;
  return lines;
}

ResolvabilityVerdict resolvability_check(const LineSet& lines, double resolution) {
  if (!(resolution > 0.0)) throw DomainError("resolution must be > 0");
  LineSet sorted = lines;
  std::sort(sorted.begin(), sorted.end(),
            [](const TransitionLine& a, const TransitionLine& b) { return a.energy < b.energy; });
  double min_sep = std::numeric_limits<double>::infinity();
  for (std::size_t role_idx : {std::size_t{0}, std::size_t{2}}) {
    for (std::size_t j = 0; j < sorted.size(); ++j) {
      if (j == role_idx) continue;
      min_sep = std::min(min_sep, std::abs(sorted[role_idx].energy - sorted[j].energy));
    }
  }
  return {min_sep >= resolution, min_sep};
}

}  // namespace qdsim::levels
