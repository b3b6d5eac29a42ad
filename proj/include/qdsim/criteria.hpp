#pragma once

// Evaluators for the numbered acceptance criteria. The acceptance binary and
// the `reproduce` report share them, so both apply the same thresholds.

#include <string>
#include <vector>

#include "qdsim/config.hpp"
#include "qdsim/evolve.hpp"
#include "qdsim/pipeline.hpp"

namespace qdsim::acceptance {

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  pipeline::Json metrics = pipeline::Json::object();
  double seconds = 0.0;
};

struct Context {
  config::ExperimentConfig cfg;
  /// Collects invariant checks from every simulation run by the evaluators.
  dynamics::InvariantMonitor monitor;
  std::size_t ramsey_seeds = 50;
  std::size_t zeeman_seeds = 100;
  std::size_t polarimetry_seeds = 100;
  /// Runtime limits count toward pass/fail only when set; reports meant to be
  /// reproducible leave them out.
  bool check_runtime = true;
  /// Path of the qdsim binary for the CLI determinism check; empty runs the
  /// same builders in-process instead.
  std::string qdsim_path;
  /// Scratch directory for CLI runs.
  std::string work_dir = "acceptance_work";
};

CriterionResult rabi_ideal_limit(Context& ctx);        // 1
CriterionResult phonon_damping(Context& ctx);          // 2
CriterionResult ramsey_t2_round_trip(Context& ctx);    // 3
CriterionResult delta_ramsey_contrast(Context& ctx);   // 4
CriterionResult su2_map_oracle(Context& ctx);          // 5
CriterionResult drift_correction(Context& ctx);        // 6
CriterionResult phase_unwrap(Context& ctx);            // 7
CriterionResult zeeman_fan(Context& ctx);              // 8
CriterionResult polarimetry(Context& ctx);             // 9
/// Must run after the others: reads the monitor they filled.
CriterionResult density_matrix_sanity(Context& ctx);   // 10
CriterionResult determinism(Context& ctx);             // 11

/// Criteria 1 to 11 in order.
std::vector<CriterionResult> run_all(Context& ctx);

/// "PASS  3  title: detail".
std::string format_line(const CriterionResult& r);
/// Runtime is included only when `with_timing`.
pipeline::Json to_json(const CriterionResult& r, bool with_timing);

}  // namespace qdsim::acceptance
