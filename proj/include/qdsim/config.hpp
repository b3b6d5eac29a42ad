#pragma once

// Experiment configuration: one TOML-style key-value document holding every
// physical default. Unknown keys are rejected.

#include <cstdint>
#include <string>
#include <vector>

#include "qdsim/evolve.hpp"
#include "qdsim/experiments.hpp"
#include "qdsim/interferometer.hpp"
#include "qdsim/levels.hpp"

namespace qdsim::config {

inline constexpr int kSchemaVersion = 1;

struct LevelsBlock {
  double field = 5.0;        // T
  double e0 = 1408911.3;     // μeV (≈ 880 nm)
  double gamma = 16.0;
  double g_e = 0.54;
  double g_h = 0.94;
  double chi = 1.5707963267948966;
  double docp = 0.93;
  double resolution = 8.0;   // μeV
  std::vector<double> fan_fields = {0, 1, 2, 3, 4, 5};
  double fan_noise = 2.0;    // μeV, Gaussian sd
};

struct PulseBlock {
  double fwhm = 3.0;                     // ps
  double kappa = 5.026548245743669;      // rad per μW^½ (4π at 2.5)
  double dt = 0.005;                     // ps
  double detuning = 0.0;                 // rad/ps
};

struct DecoherenceBlock {
  double t1 = 1000.0;
  double t2_star = 51.0;
  double branching_eta = 0.5;
  double eid_coeff = 0.02;
};

struct CountsBlock {
  double rep_rate = 80.0;
  double integration_time = 1.7578125;
  double efficiency = 1e-3;
  double background_rate = 200.0;
  double incoherent_slope = 0.0;
  double noise_scale = 1.0;   // 0 = expected values only
  double leakage = 0.0;       // driven-state population in the background control
};

struct RabiBlock {
  double sqrt_power_max = 2.5;
  std::int64_t n_points = 101;
};

struct Su2Block {
  double coarse = 66.0;
  std::int64_t n_power = 64;
  std::int64_t n_fine = 128;
  double fine_span = 12.0;
};

struct OpticsBlock {
  double lambda_qd = 880.0;     // nm, assumed emission wavelength
  double lambda_hene = 632.8;   // nm
  std::int64_t hene_sign = 1;
};

struct DriftBlock {
  double linear = 0.15;        // nm/s
  double sigma_rw = 0.5;       // nm/√s
  std::int64_t n_samples = 14401;
};

struct PolarimetryBlock {
  std::int64_t n_angles = 180;
  double intensity_noise = 0.01;   // sd as a fraction of S0/2
};

struct ExperimentConfig {
  std::int64_t schema_version = kSchemaVersion;
  std::uint64_t seed = 1;
  LevelsBlock levels;
  PulseBlock pulse;
  DecoherenceBlock decoherence;
  CountsBlock counts;
  interferometer::DelaySchedule schedule;
  RabiBlock rabi;
  Su2Block su2;
  OpticsBlock optics;
  DriftBlock drift;
  PolarimetryBlock polarimetry;

  /// Throws ConfigError on any out-of-range value.
  void validate() const;

  levels::MagnetoParams magneto() const;
  dynamics::DecoherenceParams decoherence_params() const;
  dynamics::CountModel count_model() const;
  dynamics::SimOptions sim_options() const;
  std::vector<double> rabi_grid() const;
  std::vector<double> su2_power_grid() const;
  std::vector<double> su2_fine_grid() const;
  /// Acquisition length of the SU(2) map, s.
  double su2_duration() const;
};

/// Parses a document; unknown keys, duplicate keys and type errors throw ConfigError.
ExperimentConfig parse(const std::string& text);
ExperimentConfig load(const std::string& path);

/// Canonical document (sorted sections, 17 significant digits). parse(to_text(c)) == c.
std::string to_text(const ExperimentConfig& cfg);

/// Sets one dotted key ("pulse.fwhm") from its textual value.
void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value);

/// SHA-256 of the canonical document, hex.
std::string config_hash(const ExperimentConfig& cfg);

}  // namespace qdsim::config
