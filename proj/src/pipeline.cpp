#include "qdsim/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "qdsim/error.hpp"
#include "qdsim/experiments.hpp"
#include "qdsim/format.hpp"
#include "qdsim/levels.hpp"
#include "qdsim/rng.hpp"

namespace qdsim::pipeline {

namespace {

using config::ExperimentConfig;
using io::Dataset;
using io::DatasetKind;

std::vector<double> unique_sorted(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

std::size_t index_of(const std::vector<double>& sorted, double x) {
  return static_cast<std::size_t>(std::lower_bound(sorted.begin(), sorted.end(), x) - sorted.begin());
}

dynamics::SimOptions sim_options(const ExperimentConfig& cfg, dynamics::InvariantMonitor* monitor) {
  auto o = cfg.sim_options();
  o.evolve.monitor = monitor;
  return o;
}

double role_code(levels::LineRole r) {
  switch (r) {
    case levels::LineRole::Driven: return 1.0;
    case levels::LineRole::Detected: return 2.0;
    default: return 0.0;
  }
}

Json finite_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

}  // namespace

Dataset new_dataset(DatasetKind kind, const ExperimentConfig& cfg) {
  Dataset ds;
  ds.kind = kind;
  ds.set_meta("config_hash", config::config_hash(cfg));
  ds.set_meta("seed", std::to_string(cfg.seed));
  ds.set_meta("schema_version", std::to_string(cfg.schema_version));
  return ds;
}

std::vector<double> scale_noise(const std::vector<double>& expected, const std::vector<double>& sampled, double scale) {
  if (expected.size() != sampled.size()) throw DomainError("scale_noise: length mismatch");
  std::vector<double> out(expected.size());
  for (std::size_t k = 0; k < out.size(); ++k)
    out[k] = scale == 1.0 ? sampled[k] : expected[k] + scale * (sampled[k] - expected[k]);
  return out;
}

Dataset spectrum_dataset(const ExperimentConfig& cfg, std::optional<double> field) {
  const auto params = cfg.magneto();
  const auto mixing = levels::hole_mixing(cfg.levels.chi);
  Dataset ds = new_dataset(DatasetKind::Spectrum, cfg);
  const std::vector<double> fields = field ? std::vector<double>{*field} : cfg.levels.fan_fields;
  if (fields.empty()) throw ConfigError("levels.fan_fields is empty");

  std::vector<double> b_col, line_col, se_col, sh_col, e_col, m_col, s0, s1, s2, s3, role;
  for (double b : fields) {
    auto lines = levels::transition_energies(params, b);
    levels::apply_polarizations(lines, mixing, cfg.levels.docp);
    if (b > 0.0) lines = levels::assign_roles(lines);
    if (field && b > 0.0) {
      const auto verdict = levels::resolvability_check(lines, cfg.levels.resolution);
      ds.set_meta("resolvable", verdict.pass ? "true" : "false");
      ds.set_meta("min_separation_ueV", format_double(verdict.min_separation));
    }
    for (std::size_t k = 0; k < lines.size(); ++k) {
      b_col.push_back(b);
      line_col.push_back(static_cast<double>(k));
      se_col.push_back(lines[k].s_e);
      sh_col.push_back(lines[k].s_h);
      e_col.push_back(lines[k].energy);
      s0.push_back(lines[k].stokes.s0);
      s1.push_back(lines[k].stokes.s1);
      s2.push_back(lines[k].stokes.s2);
      s3.push_back(lines[k].stokes.s3);
      role.push_back(role_code(lines[k].role));
    }
  }
  if (!field) {
    const double sd = cfg.levels.fan_noise * cfg.counts.noise_scale;
    m_col.resize(e_col.size());
    for (std::size_t r = 0; r < e_col.size(); ++r) {
      auto gen = substream(cfg.seed, StreamDomain::ZeemanNoise, r);
      std::normal_distribution<double> noise(0.0, 1.0);
      m_col[r] = e_col[r] + sd * noise(gen);
    }
  }
  ds.add_column("field", "T", b_col);
  ds.add_column("line", "index", line_col);
  ds.add_column("s_e", "", se_col);
  ds.add_column("s_h", "", sh_col);
  ds.add_column("energy", "ueV", e_col);
  if (!field) ds.add_column("measured", "ueV", m_col);
  ds.add_column("S0", "", s0);
  ds.add_column("S1", "", s1);
  ds.add_column("S2", "", s2);
  ds.add_column("S3", "", s3);
  ds.add_column("role", "0=other 1=driven 2=detected", role);
  return ds;
}

Dataset rabi_dataset(const ExperimentConfig& cfg, dynamics::InvariantMonitor* monitor) {
  const auto grid = cfg.rabi_grid();
  const auto dec = cfg.decoherence_params();
  const auto model = cfg.count_model();
  const auto opts = sim_options(cfg, monitor);
  const auto sig = dynamics::simulate_rabi(grid, cfg.pulse.kappa, dec, model, opts);
  const auto bg = dynamics::simulate_background_control(grid, cfg.pulse.kappa, dec, model, opts, cfg.counts.leakage);

  Dataset ds = new_dataset(DatasetKind::Rabi, cfg);
  ds.set_meta("kappa", format_double(cfg.pulse.kappa));
  ds.add_column("sqrt_power", "uW^0.5", sig.sqrt_power);
  ds.add_column("theta", "rad", sig.theta);
  ds.add_column("population", "", sig.population);
  ds.add_column("expected", "counts", sig.expected);
  ds.add_column("counts", "counts", scale_noise(sig.expected, sig.counts, cfg.counts.noise_scale));
  ds.add_column("background_expected", "counts", bg.expected);
  ds.add_column("background", "counts", scale_noise(bg.expected, bg.counts, cfg.counts.noise_scale));
  return ds;
}

Dataset ramsey_dataset(const ExperimentConfig& cfg, dynamics::InvariantMonitor* monitor) {
  const auto coarse = cfg.schedule.coarse_delays();
  const auto fine = cfg.schedule.fine_delays();
  const auto data = dynamics::simulate_ramsey(constants::kPi / 2, coarse, fine, cfg.optics.lambda_qd,
                                              cfg.decoherence_params(), cfg.count_model(), sim_options(cfg, monitor));
  Dataset ds = new_dataset(DatasetKind::Ramsey, cfg);
  ds.set_meta("theta", format_double(data.theta));
  std::vector<double> cc, ff;
  for (double c : coarse)
    for (double f : fine) {
      cc.push_back(c);
      ff.push_back(f);
    }
  ds.add_column("coarse_delay", "ps", cc);
  ds.add_column("fine_delay", "fs", ff);
  ds.add_column("phase", "rad", data.phase);
  ds.add_column("population", "", data.population);
  ds.add_column("expected", "counts", data.expected);
  ds.add_column("counts", "counts", scale_noise(data.expected, data.counts, cfg.counts.noise_scale));
  return ds;
}

Dataset polarimetry_dataset(const ExperimentConfig& cfg) {
  auto lines = levels::transition_energies(cfg.magneto(), cfg.levels.field);
  levels::apply_polarizations(lines, levels::hole_mixing(cfg.levels.chi), cfg.levels.docp);
  const auto alphas = analysis::uniform_angles(static_cast<std::size_t>(cfg.polarimetry.n_angles));
  Dataset ds = new_dataset(DatasetKind::Polarimetry, cfg);
  std::vector<double> line_col, alpha_col, i_col, truth_col;
  for (std::size_t k = 0; k < lines.size(); ++k) {
    const auto& s = lines[k].stokes;
    const auto clean = analysis::polarimetry_simulate(s, alphas);
    auto gen = substream(cfg.seed, StreamDomain::PolarimetryNoise, k);
    std::normal_distribution<double> noise(0.0, 1.0);
    const double sd = cfg.polarimetry.intensity_noise * cfg.counts.noise_scale * s.s0 / 2.0;
    for (std::size_t a = 0; a < alphas.size(); ++a) {
      line_col.push_back(static_cast<double>(k));
      alpha_col.push_back(alphas[a]);
      truth_col.push_back(clean[a]);
      i_col.push_back(clean[a] + sd * noise(gen));
    }
    ds.set_meta("line" + std::to_string(k) + "_stokes",
                format_double(s.s0) + " " + format_double(s.s1) + " " + format_double(s.s2) + " " + format_double(s.s3));
  }
  ds.add_column("line", "index", line_col);
  ds.add_column("alpha", "rad", alpha_col);
  ds.add_column("intensity", "arb", i_col);
  ds.add_column("expected", "arb", truth_col);
  return ds;
}

interferometer::DelayMap delay_map_from(const Dataset& ds, const std::string& column) {
  const auto& pc = ds.column("sqrt_power").values;
  const auto& fc = ds.column("fine_delay_fs").values;
  const auto& tc = ds.column("timestamp_s").values;
  const auto& vc = ds.column(column).values;
  interferometer::DelayMap m;
  m.sqrt_power = unique_sorted(pc);
  m.fine_delay = unique_sorted(fc);
  if (m.rows() * m.cols() != ds.rows()) throw SchemaError("Su2Map rows do not form a complete power x delay grid");
  m.values.assign(ds.rows(), std::nan(""));
  m.timestamps.assign(ds.rows(), std::nan(""));
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    const std::size_t i = index_of(m.sqrt_power, pc[r]), j = index_of(m.fine_delay, fc[r]);
    m.values[i * m.cols() + j] = vc[r];
    m.timestamps[i * m.cols() + j] = tc[r];
  }
  return m;
}

Su2Output su2_datasets(const ExperimentConfig& cfg, bool drift, bool correct, dynamics::InvariantMonitor* monitor) {
  const auto powers = cfg.su2_power_grid();
  const auto fine = cfg.su2_fine_grid();
  const double duration = cfg.su2_duration();
  const auto n_samples = static_cast<std::size_t>(cfg.drift.n_samples);

  interferometer::DriftTrace trace;
  if (drift) {
    trace = interferometer::generate_drift(duration, n_samples, cfg.drift.sigma_rw, cfg.drift.linear, cfg.seed);
  } else {
    trace.seed = cfg.seed;
    for (std::size_t k = 0; k < n_samples; ++k)
      trace.timestamps.push_back(duration * static_cast<double>(k) / static_cast<double>(n_samples - 1));
    trace.path_drift.assign(n_samples, 0.0);
  }

  const auto map = dynamics::simulate_su2_map(powers, fine, cfg.su2.coarse, cfg.pulse.kappa, cfg.optics.lambda_qd,
                                              cfg.decoherence_params(), cfg.count_model(), sim_options(cfg, monitor),
                                              drift ? &trace : nullptr);

  Su2Output out{new_dataset(DatasetKind::Su2Map, cfg), new_dataset(DatasetKind::HeNe, cfg), std::nullopt};
  auto& ds = out.map;
  ds.set_meta("drift", drift ? "on" : "off");
  ds.set_meta("coarse_delay_ps", format_double(cfg.su2.coarse));
  std::vector<double> pc, fc, th;
  for (std::size_t i = 0; i < powers.size(); ++i)
    for (double f : fine) {
      pc.push_back(powers[i]);
      fc.push_back(f);
      th.push_back(map.theta[i]);
    }
  ds.add_column("sqrt_power", "uW^0.5", pc);
  ds.add_column("fine_delay_fs", "fs", fc);
  ds.add_column("counts", "counts", scale_noise(map.expected, map.counts, cfg.counts.noise_scale));
  ds.add_column("timestamp_s", "s", map.timestamps);
  ds.add_column("theta", "rad", th);
  ds.add_column("realized_fine_fs", "fs", map.realized_fine);
  ds.add_column("phase", "rad", map.phase);
  ds.add_column("population", "", map.population);
  ds.add_column("expected", "counts", map.expected);

  const auto hene = interferometer::hene_wrapped_phase(trace, cfg.optics.lambda_hene,
                                                       static_cast<int>(cfg.optics.hene_sign));
  out.hene.set_meta("drift", drift ? "on" : "off");
  out.hene.set_meta("lambda_hene_nm", format_double(cfg.optics.lambda_hene));
  out.hene.add_column("timestamp_s", "s", hene.timestamps);
  out.hene.add_column("wrapped_phase", "rad", hene.wrapped_phase);
  out.hene.add_column("path_drift", "nm", trace.path_drift);

  if (correct) out.corrected = correct_drift(out.map, out.hene, cfg);
  return out;
}

Dataset correct_drift(const Dataset& map, const Dataset& hene_ds, const ExperimentConfig& cfg) {
  if (map.kind != DatasetKind::Su2Map) throw DomainError("correct-drift needs a Su2Map dataset");
  if (hene_ds.kind != DatasetKind::HeNe) throw DomainError("correct-drift needs a HeNe dataset");
  interferometer::HeNeTrace hene{hene_ds.column("timestamp_s").values, hene_ds.column("wrapped_phase").values};
  const double period = interferometer::fringe_period_fs(cfg.optics.lambda_qd);
  const int sign = static_cast<int>(cfg.optics.hene_sign);

  const auto raw = delay_map_from(map, "counts");
  const auto fixed = interferometer::correct_su2_map(raw, hene, raw.fine_delay, cfg.optics.lambda_hene, sign, period);

  Dataset ds = new_dataset(DatasetKind::Su2Map, cfg);
  ds.metadata = map.metadata;
  ds.set_meta("corrected", "on");
  ds.set_meta("n_missing", std::to_string(fixed.n_missing));
  std::vector<double> pc, fc;
  for (double p : raw.sqrt_power)
    for (double f : raw.fine_delay) {
      pc.push_back(p);
      fc.push_back(f);
    }
  ds.add_column("sqrt_power", "uW^0.5", pc);
  ds.add_column("fine_delay_fs", "fs", fc);
  ds.add_column("counts", "counts", fixed.map.values);
  ds.add_column("timestamp_s", "s", fixed.map.timestamps);
  if (map.has_column("expected")) {
    const auto exp = interferometer::correct_su2_map(delay_map_from(map, "expected"), hene, raw.fine_delay,
                                                     cfg.optics.lambda_hene, sign, period);
    ds.add_column("expected", "counts", exp.map.values);
  }
  return ds;
}

RabiAnalysis analyze_rabi(const Dataset& ds) {
  if (ds.kind != DatasetKind::Rabi) throw DomainError("fit-rabi needs a Rabi dataset");
  const auto& x = ds.column("sqrt_power").values;
  const auto& y = ds.column("counts").values;
  RabiAnalysis a;
  if (ds.has_column("background")) {
    a.corrected = analysis::subtract_background(x, y, x, ds.column("background").values);
  } else {
    a.corrected.x = x;
    a.corrected.y = y;
    a.corrected.flags.assign(x.size(), analysis::PointFlag::Ok);
  }
  a.fit = analysis::fit_rabi(a.corrected.x, a.corrected.y);
  return a;
}

RamseyAnalysis analyze_ramsey(const Dataset& ds, const std::string& counts_column) {
  if (ds.kind != DatasetKind::Ramsey) throw DomainError("fit-ramsey needs a Ramsey dataset");
  const auto& cc = ds.column("coarse_delay").values;
  const auto& fc = ds.column("fine_delay").values;
  const auto& yc = ds.column(counts_column).values;

  std::vector<double> order;
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    if (!groups.count(cc[r])) order.push_back(cc[r]);
    groups[cc[r]].first.push_back(fc[r]);
    groups[cc[r]].second.push_back(yc[r]);
  }
  std::sort(order.begin(), order.end());

  RamseyAnalysis a;
  for (double c : order) {
    const auto& [x, y] = groups[c];
    try {
      const auto f = analysis::fit_fringe(x, y);
      a.coarse.push_back(c);
      a.contrast.push_back(f.contrast);
      a.contrast_sigma.push_back(f.contrast_sigma);
      a.amplitude.push_back(f.amplitude);
    } catch (const NumericError&) {
      a.failed_coarse.push_back(c);
    }
  }
  if (a.coarse.size() < 3) throw NumericError("fewer than 3 coarse delays show fringes");
  a.decay = analysis::fit_contrast_decay(a.coarse, a.contrast);
  // Amplitudes are counts; scale into (0, 1] for the decay fit.
  const double peak = *std::max_element(a.amplitude.begin(), a.amplitude.end());
  std::vector<double> scaled(a.amplitude.size());
  for (std::size_t k = 0; k < scaled.size(); ++k) scaled[k] = a.amplitude[k] / peak;
  a.amplitude_decay = analysis::fit_contrast_decay(a.coarse, scaled);
  return a;
}

analysis::ZeemanFit analyze_zeeman(const Dataset& ds) {
  if (ds.kind != DatasetKind::Spectrum) throw DomainError("fit-zeeman needs a Spectrum dataset");
  const auto& bc = ds.column("field").values;
  const auto& ec = ds.column(ds.has_column("measured") ? "measured" : "energy").values;
  std::map<double, std::vector<double>> by_field;
  for (std::size_t r = 0; r < ds.rows(); ++r) by_field[bc[r]].push_back(ec[r]);
  std::vector<analysis::FanPoint> pts;
  for (const auto& [b, es] : by_field) {
    if (es.size() != 4) throw SchemaError("every field needs exactly 4 line energies");
    analysis::FanPoint p;
    p.b = b;
    std::copy(es.begin(), es.end(), p.energies.begin());
    pts.push_back(p);
  }
  return analysis::fit_zeeman_fan(pts);
}

std::vector<PolarimetryLine> analyze_polarimetry(const Dataset& ds) {
  if (ds.kind != DatasetKind::Polarimetry) throw DomainError("fit-polarimetry needs a Polarimetry dataset");
  const auto& lc = ds.column("line").values;
  const auto& ac = ds.column("alpha").values;
  const auto& ic = ds.column("intensity").values;
  std::map<double, std::pair<std::vector<double>, std::vector<double>>> groups;
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    groups[lc[r]].first.push_back(ac[r]);
    groups[lc[r]].second.push_back(ic[r]);
  }
  std::vector<PolarimetryLine> out;
  for (const auto& [line, g] : groups)
    out.push_back({static_cast<int>(line), analysis::polarimetry_extract(g.first, g.second)});
  return out;
}

Json to_json(const analysis::FitReport& r) {
  Json j;
  Json params = Json::object(), sigmas = Json::object();
  for (std::size_t k = 0; k < r.names.size(); ++k) {
    params[r.names[k]] = finite_or_null(r.params[k]);
    sigmas[r.names[k]] = k < r.sigmas.size() ? finite_or_null(r.sigmas[k]) : Json(nullptr);
  }
  j["params"] = params;
  j["sigmas"] = sigmas;
  j["residual_rms"] = finite_or_null(r.residual_rms);
  j["converged"] = r.converged;
  j["n_iter"] = r.n_iter;
  j["flags"] = r.flags;
  return j;
}

Json to_json(const RabiAnalysis& a) {
  Json j;
  j["kappa"] = finite_or_null(a.fit.kappa);
  j["pi_sqrt_power"] = finite_or_null(a.fit.pi_sqrt_power);
  j["pi_power"] = finite_or_null(a.fit.pi_power);
  j["contrast"] = finite_or_null(a.fit.contrast);
  j["damping"] = finite_or_null(a.fit.damping);
  j["offset"] = finite_or_null(a.fit.offset);
  j["slope"] = finite_or_null(a.fit.slope);
  j["oscillating"] = a.fit.oscillating;
  std::size_t negative = 0, boundary = 0;
  for (auto f : a.corrected.flags) {
    negative += f == analysis::PointFlag::Negative;
    boundary += f == analysis::PointFlag::Boundary;
  }
  j["negative_points"] = negative;
  j["boundary_points"] = boundary;
  j["fit"] = to_json(a.fit.report);
  return j;
}

Json to_json(const RamseyAnalysis& a) {
  Json j;
  j["t2_star_ps"] = finite_or_null(a.decay.t2_star);
  j["t2_star_sigma_ps"] = finite_or_null(a.decay.t2_star_sigma);
  j["c0"] = finite_or_null(a.decay.c0);
  j["amplitude_t2_star_ps"] = finite_or_null(a.amplitude_decay.t2_star);
  Json pts = Json::array();
  for (std::size_t k = 0; k < a.coarse.size(); ++k)
    pts.push_back({{"coarse_delay_ps", a.coarse[k]},
                   {"contrast", finite_or_null(a.contrast[k])},
                   {"contrast_sigma", finite_or_null(a.contrast_sigma[k])},
                   {"amplitude", finite_or_null(a.amplitude[k])}});
  j["fringes"] = pts;
  j["no_oscillation_ps"] = a.failed_coarse;
  j["fit"] = to_json(a.decay.report);
  return j;
}

Json to_json(const analysis::ZeemanFit& z) {
  Json j;
  j["E0_ueV"] = z.e0;
  j["gamma_ueV_per_T2"] = z.gamma;
  j["g_e"] = z.g_e;
  j["g_h"] = z.g_h;
  j["fit"] = to_json(z.report);
  return j;
}

Json to_json(const std::vector<PolarimetryLine>& lines) {
  Json arr = Json::array();
  for (const auto& l : lines) {
    const auto& s = l.result.stokes;
    arr.push_back({{"line", l.line},
                   {"S0", s.s0},
                   {"S1", s.s1},
                   {"S2", s.s2},
                   {"S3", s.s3},
                   {"docp", finite_or_null(l.result.docp)}});
  }
  return arr;
}

Json report_header(const std::string& kind, const std::string& config_hash, const std::string& seed) {
  Json j;
  j["tool"] = "qdsim";
  j["report"] = kind;
  j["report_schema"] = 1;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  return j;
}

Json report_header(const std::string& kind, const ExperimentConfig& cfg) {
  return report_header(kind, config::config_hash(cfg), std::to_string(cfg.seed));
}

}  // namespace qdsim::pipeline
