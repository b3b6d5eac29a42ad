// Prints one PASS/FAIL line per acceptance criterion and exits non-zero if
// any criterion fails.
//
//   qdsim_acceptance [--qdsim PATH] [--work DIR] [--json FILE] [--only N]

#include <cstdio>
#include <cstdlib>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "qdsim/criteria.hpp"
#include "qdsim/dataset.hpp"

int main(int argc, char** argv) {
  CLI::App app{"qdsim acceptance criteria"};
  std::string qdsim_path, work_dir = "acceptance_work", json_path;
  int only = 0;
  app.add_option("--qdsim", qdsim_path, "qdsim binary for the CLI determinism check");
  app.add_option("--work", work_dir, "scratch directory");
  app.add_option("--json", json_path, "also write results as JSON");
  app.add_option("--only", only, "run a single criterion");
  CLI11_PARSE(app, argc, argv);

  qdsim::acceptance::Context ctx;
  ctx.qdsim_path = qdsim_path;
  ctx.work_dir = work_dir;

  std::vector<qdsim::acceptance::CriterionResult> results;
  if (only > 0) {
    using Fn = qdsim::acceptance::CriterionResult (*)(qdsim::acceptance::Context&);
    const Fn fns[] = {qdsim::acceptance::rabi_ideal_limit,   qdsim::acceptance::phonon_damping,
                      qdsim::acceptance::ramsey_t2_round_trip, qdsim::acceptance::delta_ramsey_contrast,
                      qdsim::acceptance::su2_map_oracle,     qdsim::acceptance::drift_correction,
                      qdsim::acceptance::phase_unwrap,       qdsim::acceptance::zeeman_fan,
                      qdsim::acceptance::polarimetry,        qdsim::acceptance::density_matrix_sanity,
                      qdsim::acceptance::determinism};
    if (only > 11) {
      std::cerr << "--only must lie in 1..11\n";
      return 2;
    }
    try {
      results.push_back(fns[only - 1](ctx));
    } catch (const std::exception& e) {
      qdsim::acceptance::CriterionResult r;
      r.id = only;
      r.title = "criterion " + std::to_string(only);
      r.detail = std::string("error: ") + e.what();
      results.push_back(r);
    }
  } else {
    results = qdsim::acceptance::run_all(ctx);
  }

  bool all = true;
  for (const auto& r : results) {
    std::cout << qdsim::acceptance::format_line(r) << std::endl;
    all = all && r.pass;
  }
  if (!json_path.empty()) {
    qdsim::pipeline::Json j = qdsim::pipeline::Json::array();
    for (const auto& r : results) j.push_back(qdsim::acceptance::to_json(r, true));
    qdsim::io::atomic_write(json_path, j.dump(2) + "\n");
  }
  return all ? 0 : 1;
}
