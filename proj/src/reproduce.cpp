#include "qdsim/reproduce.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "qdsim/criteria.hpp"
#include "qdsim/error.hpp"

namespace qdsim::pipeline {

namespace {

double rel(double value, double truth) { return std::abs(value - truth) / std::abs(truth); }

Json run_stage(const std::function<Json()>& body) {
  try {
    Json j = body();
    j["status"] = "ok";
    return j;
  } catch (const std::exception& e) {
    return Json{{"status", "error"}, {"error", e.what()}};
  }
}

double rms_over_amplitude(const std::vector<double>& a, const std::vector<double>& ref) {
  double s = 0.0;
  std::size_t n = 0;
  for (std::size_t k = 0; k < a.size(); ++k) {
    if (!std::isfinite(a[k])) continue;
    s += (a[k] - ref[k]) * (a[k] - ref[k]);
    ++n;
  }
  const auto [lo, hi] = std::minmax_element(ref.begin(), ref.end());
  return n ? std::sqrt(s / static_cast<double>(n)) / (*hi - *lo) : std::nan("");
}

}  // namespace

Json reproduce(const config::ExperimentConfig& cfg, const ReproduceOptions& opts) {
  Json report = report_header("reproduce", cfg);
  report["noise_scale"] = cfg.counts.noise_scale;
  Json stages;

  stages["rabi"] = run_stage([&] {
    const auto a = analyze_rabi(rabi_dataset(cfg));
    const double pi_sp = constants::kPi / cfg.pulse.kappa;
    return Json{{"truth", {{"kappa", cfg.pulse.kappa}, {"pi_sqrt_power", pi_sp}}},
                {"recovered", {{"kappa", a.fit.kappa}, {"pi_sqrt_power", a.fit.pi_sqrt_power}}},
                {"relative_error", {{"kappa", rel(a.fit.kappa, cfg.pulse.kappa)}}},
                {"fit", to_json(a)}};
  });

  stages["ramsey"] = run_stage([&] {
    const auto a = analyze_ramsey(ramsey_dataset(cfg));
    const double truth = cfg.decoherence.t2_star;
    return Json{{"truth", {{"t2_star_ps", truth}}},
                {"recovered", {{"t2_star_ps", a.decay.t2_star}, {"t2_star_sigma_ps", a.decay.t2_star_sigma}}},
                {"relative_error", {{"t2_star", rel(a.decay.t2_star, truth)}}},
                {"within_9ps", std::abs(a.decay.t2_star - truth) <= 9.0},
                {"amplitude_decay_t2_star_ps", a.amplitude_decay.t2_star},
                {"fit", to_json(a)}};
  });

  stages["su2_drift"] = run_stage([&] {
    const auto drifted = su2_datasets(cfg, true, true);
    const auto still = su2_datasets(cfg, false, false);
    const auto& ref = still.map.column("expected").values;
    const auto& path = drifted.hene.column("path_drift").values;
    const auto [lo, hi] = std::minmax_element(path.begin(), path.end());
    return Json{{"drift_fringes", (*hi - *lo) / cfg.optics.lambda_qd},
                {"uncorrected_rms_fraction", rms_over_amplitude(drifted.map.column("expected").values, ref)},
                {"corrected_rms_fraction", rms_over_amplitude(drifted.corrected->column("expected").values, ref)},
                {"corrected_counts_rms_fraction", rms_over_amplitude(drifted.corrected->column("counts").values, ref)},
                {"n_missing", drifted.corrected->meta("n_missing")}};
  });

  stages["zeeman"] = run_stage([&] {
    const auto z = analyze_zeeman(spectrum_dataset(cfg));
    const auto& lv = cfg.levels;
    return Json{{"truth", {{"E0_ueV", lv.e0}, {"gamma", lv.gamma}, {"g_e", lv.g_e}, {"g_h", lv.g_h}}},
                {"recovered", {{"E0_ueV", z.e0}, {"gamma", z.gamma}, {"g_e", z.g_e}, {"g_h", z.g_h}}},
                {"relative_error",
                 {{"E0", rel(z.e0, lv.e0)}, {"gamma", rel(z.gamma, lv.gamma)}, {"g_e", rel(z.g_e, lv.g_e)},
                  {"g_h", rel(z.g_h, lv.g_h)}}},
                {"gamma_within_2pct", rel(z.gamma, lv.gamma) <= 0.02}};
  });

  stages["polarimetry"] = run_stage([&] {
    const auto lines = analyze_polarimetry(polarimetry_dataset(cfg));
    double worst = 0.0;
    for (const auto& l : lines) worst = std::max(worst, std::abs(l.result.docp - cfg.levels.docp));
    return Json{{"truth", {{"docp", cfg.levels.docp}}},
                {"recovered", to_json(lines)},
                {"max_docp_error", worst}};
  });
  report["stages"] = stages;

  if (opts.criteria) {
    acceptance::Context ctx;
    ctx.cfg = cfg;
    ctx.check_runtime = false;
    Json crit = Json::array();
    std::size_t passed = 0;
    const auto results = acceptance::run_all(ctx);
    for (const auto& r : results) {
      crit.push_back(acceptance::to_json(r, false));
      passed += r.pass;
    }
    report["criteria"] = crit;
    report["summary"] = {{"passed", passed}, {"failed", results.size() - passed}};
  }
  return report;
}

}  // namespace qdsim::pipeline
