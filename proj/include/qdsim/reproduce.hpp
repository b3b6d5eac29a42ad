#pragma once

// End-to-end reproduction: every stage of the pipeline on one configuration,
// reported as truth against recovered values, followed by the acceptance
// criteria.

#include "qdsim/config.hpp"
#include "qdsim/pipeline.hpp"

namespace qdsim::pipeline {

struct ReproduceOptions {
  bool criteria = true;  // also evaluate acceptance criteria 1 to 11
};

/// Stage failures are recorded in the report rather than thrown. The report
/// holds no timings, so it is bitwise reproducible.
Json reproduce(const config::ExperimentConfig& cfg, const ReproduceOptions& opts = {});

}  // namespace qdsim::pipeline
