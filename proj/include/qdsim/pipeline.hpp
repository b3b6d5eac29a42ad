#pragma once

// Experiment orchestration: builds datasets from a configuration, analyses
// datasets back into fitted parameters, and renders JSON reports.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qdsim/config.hpp"
#include "qdsim/dataset.hpp"
#include "qdsim/fits.hpp"
#include "qdsim/polarimetry.hpp"

namespace qdsim::pipeline {

using Json = nlohmann::ordered_json;

/// Empty dataset stamped with the config hash and seed.
io::Dataset new_dataset(io::DatasetKind kind, const config::ExperimentConfig& cfg);

/// Four lines at `field`, or the noisy fan over levels.fan_fields when unset.
io::Dataset spectrum_dataset(const config::ExperimentConfig& cfg, std::optional<double> field = std::nullopt);
io::Dataset rabi_dataset(const config::ExperimentConfig& cfg, dynamics::InvariantMonitor* monitor = nullptr);
io::Dataset ramsey_dataset(const config::ExperimentConfig& cfg, dynamics::InvariantMonitor* monitor = nullptr);
io::Dataset polarimetry_dataset(const config::ExperimentConfig& cfg);

struct Su2Output {
  io::Dataset map;
  io::Dataset hene;
  std::optional<io::Dataset> corrected;
};

/// The SU(2) map over su2.n_power × su2.n_fine plus the HeNe reference
/// recorded alongside it. With drift off the reference is flat.
Su2Output su2_datasets(const config::ExperimentConfig& cfg, bool drift, bool correct,
                       dynamics::InvariantMonitor* monitor = nullptr);

/// Re-grids a drifted map onto its nominal delay axis using the HeNe trace.
io::Dataset correct_drift(const io::Dataset& map, const io::Dataset& hene, const config::ExperimentConfig& cfg);

/// Counts after rescaling shot noise: expected + scale·(sampled − expected).
std::vector<double> scale_noise(const std::vector<double>& expected, const std::vector<double>& sampled, double scale);

struct RabiAnalysis {
  analysis::CorrectedCurve corrected;
  analysis::RabiFit fit;
};

/// Background-subtracted fit; uses the `background` column when present.
RabiAnalysis analyze_rabi(const io::Dataset& ds);

struct RamseyAnalysis {
  std::vector<double> coarse;          // ps, fits that succeeded
  std::vector<double> contrast;
  std::vector<double> contrast_sigma;
  std::vector<double> amplitude;       // counts
  std::vector<double> failed_coarse;   // ps, no oscillation found
  analysis::ContrastDecayFit decay;            // contrast = amplitude/offset
  analysis::ContrastDecayFit amplitude_decay;  // amplitude alone
};

/// Fringe fit per coarse delay, then exponential decay of the contrast.
/// `counts_column` selects the column to fit.
RamseyAnalysis analyze_ramsey(const io::Dataset& ds, const std::string& counts_column = "counts");

/// Fan fit from a Spectrum dataset; uses `measured` when present.
analysis::ZeemanFit analyze_zeeman(const io::Dataset& ds);

struct PolarimetryLine {
  int line = 0;
  analysis::PolarimetryResult result;
};
std::vector<PolarimetryLine> analyze_polarimetry(const io::Dataset& ds);

/// A power × delay grid rebuilt from a Su2Map dataset's `column`.
interferometer::DelayMap delay_map_from(const io::Dataset& ds, const std::string& column);

Json to_json(const analysis::FitReport& r);
Json to_json(const RabiAnalysis& a);
Json to_json(const RamseyAnalysis& a);
Json to_json(const analysis::ZeemanFit& z);
Json to_json(const std::vector<PolarimetryLine>& lines);

/// JSON header every report starts with: tool, schema, config hash, seed.
Json report_header(const std::string& kind, const std::string& config_hash, const std::string& seed);
Json report_header(const std::string& kind, const config::ExperimentConfig& cfg);

}  // namespace qdsim::pipeline
