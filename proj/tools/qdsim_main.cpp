// qdsim: command-line front end for the trion coherent-control simulator.
//
//   qdsim <subcommand> [--config PATH] [--seed N] [--out DIR] [--drift on|off] [--correct on|off]
//
// Exit codes: 0 ok, 2 configuration or validation error, 3 numeric failure,
// 4 I/O error.

#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qdsim/config.hpp"
#include "qdsim/dataset.hpp"
#include "qdsim/error.hpp"
#include "qdsim/pipeline.hpp"
#include "qdsim/reproduce.hpp"
#include "qdsim/svg_plot.hpp"

namespace fs = std::filesystem;
using qdsim::pipeline::Json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitIo = 4;

struct Options {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::string out = ".";
  bool drift = false;
  bool correct = false;
  std::vector<std::string> overrides;
  std::optional<double> field;
  std::string in;
  std::string hene;
};

qdsim::config::ExperimentConfig load_config(const Options& o) {
  qdsim::config::ExperimentConfig cfg;
  if (!o.config_path.empty()) cfg = qdsim::config::load(o.config_path);
  for (const auto& kv : o.overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw qdsim::ConfigError("--set expects KEY=VALUE, got '" + kv + "'");
    qdsim::config::set_value(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (o.seed) cfg.seed = *o.seed;
  cfg.validate();
  return cfg;
}

fs::path out_path(const Options& o, const std::string& name) { return fs::path(o.out) / name; }

void write_report(const Options& o, const std::string& name, const Json& j) {
  qdsim::io::atomic_write(out_path(o, name), j.dump(2) + "\n");
}

Json dataset_summary(const qdsim::io::Dataset& ds, const std::string& file) {
  return Json{{"file", file}, {"kind", qdsim::io::kind_name(ds.kind)}, {"rows", ds.rows()}};
}

// Writes `<stem>.csv` plus its sidecar and returns the report entry.
Json emit(const Options& o, const qdsim::io::Dataset& ds, const std::string& stem) {
  qdsim::io::export_dataset(ds, out_path(o, stem + ".csv"));
  return dataset_summary(ds, stem + ".csv");
}

Json fit_header(const std::string& kind, const qdsim::io::Dataset& ds, const std::string& input) {
  Json j = qdsim::pipeline::report_header(kind, ds.meta("config_hash"), ds.meta("seed"));
  j["input"] = fs::path(input).filename().string();
  return j;
}

int cmd_spectrum(const Options& o) {
  const auto cfg = load_config(o);
  const auto ds = qdsim::pipeline::spectrum_dataset(cfg, o.field);
  Json j = qdsim::pipeline::report_header("spectrum", cfg);
  j["dataset"] = emit(o, ds, "spectrum");
  if (o.field) {
    j["field_T"] = *o.field;
    Json lines = Json::array();
    const auto& e = ds.column("energy").values;
    for (double v : e) lines.push_back({{"energy_ueV", v}, {"offset_from_E0_ueV", v - cfg.levels.e0}});
    j["lines"] = lines;
    j["resolvable"] = ds.meta("resolvable") == "true";
  }
  write_report(o, "spectrum_report.json", j);
  return kExitOk;
}

int cmd_rabi(const Options& o) {
  const auto cfg = load_config(o);
  Json j = qdsim::pipeline::report_header("rabi", cfg);
  j["dataset"] = emit(o, qdsim::pipeline::rabi_dataset(cfg), "rabi");
  j["truth"] = {{"kappa", cfg.pulse.kappa}, {"pi_sqrt_power", qdsim::constants::kPi / cfg.pulse.kappa}};
  write_report(o, "rabi_report.json", j);
  return kExitOk;
}

int cmd_ramsey(const Options& o) {
  const auto cfg = load_config(o);
  Json j = qdsim::pipeline::report_header("ramsey", cfg);
  j["dataset"] = emit(o, qdsim::pipeline::ramsey_dataset(cfg), "ramsey");
  j["truth"] = {{"t2_star_ps", cfg.decoherence.t2_star}};
  write_report(o, "ramsey_report.json", j);
  return kExitOk;
}

int cmd_su2(const Options& o) {
  const auto cfg = load_config(o);
  const auto out = qdsim::pipeline::su2_datasets(cfg, o.drift, o.correct);
  Json j = qdsim::pipeline::report_header("su2", cfg);
  j["drift"] = o.drift;
  j["correct"] = o.correct;
  Json files = Json::array();
  files.push_back(emit(o, out.map, "su2"));
  files.push_back(emit(o, out.hene, "hene"));
  if (out.corrected) {
    files.push_back(emit(o, *out.corrected, "su2_corrected"));
    j["n_missing"] = out.corrected->meta("n_missing");
  }
  j["datasets"] = files;
  write_report(o, "su2_report.json", j);
  return kExitOk;
}

int cmd_polarimetry(const Options& o) {
  const auto cfg = load_config(o);
  Json j = qdsim::pipeline::report_header("polarimetry", cfg);
  j["dataset"] = emit(o, qdsim::pipeline::polarimetry_dataset(cfg), "polarimetry");
  j["truth"] = {{"docp", cfg.levels.docp}};
  write_report(o, "polarimetry_report.json", j);
  return kExitOk;
}

int cmd_correct_drift(const Options& o) {
  const auto cfg = load_config(o);
  const auto map = qdsim::io::read_csv(o.in);
  const auto hene = qdsim::io::read_csv(o.hene);
  const auto fixed = qdsim::pipeline::correct_drift(map, hene, cfg);
  Json j = fit_header("correct-drift", map, o.in);
  j["hene_input"] = fs::path(o.hene).filename().string();
  j["dataset"] = emit(o, fixed, "su2_corrected");
  j["n_missing"] = fixed.meta("n_missing");
  write_report(o, "correct_drift_report.json", j);
  return kExitOk;
}

int cmd_fit_rabi(const Options& o) {
  const auto ds = qdsim::io::read_csv(o.in);
  Json j = fit_header("fit-rabi", ds, o.in);
  j["result"] = qdsim::pipeline::to_json(qdsim::pipeline::analyze_rabi(ds));
  write_report(o, "fit_rabi.json", j);
  return kExitOk;
}

int cmd_fit_ramsey(const Options& o) {
  const auto ds = qdsim::io::read_csv(o.in);
  Json j = fit_header("fit-ramsey", ds, o.in);
  j["result"] = qdsim::pipeline::to_json(qdsim::pipeline::analyze_ramsey(ds));
  write_report(o, "fit_ramsey.json", j);
  return kExitOk;
}

int cmd_fit_zeeman(const Options& o) {
  const auto ds = qdsim::io::read_csv(o.in);
  Json j = fit_header("fit-zeeman", ds, o.in);
  j["result"] = qdsim::pipeline::to_json(qdsim::pipeline::analyze_zeeman(ds));
  write_report(o, "fit_zeeman.json", j);
  return kExitOk;
}

int cmd_fit_polarimetry(const Options& o) {
  const auto ds = qdsim::io::read_csv(o.in);
  Json j = fit_header("fit-polarimetry", ds, o.in);
  j["result"] = qdsim::pipeline::to_json(qdsim::pipeline::analyze_polarimetry(ds));
  write_report(o, "fit_polarimetry.json", j);
  return kExitOk;
}

int cmd_reproduce(const Options& o) {
  const auto cfg = load_config(o);
  const Json j = qdsim::pipeline::reproduce(cfg);
  write_report(o, "reproduce.json", j);
  const auto& s = j["summary"];
  std::cerr << "reproduce: " << s["passed"].get<std::size_t>() << " criteria passed, "
            << s["failed"].get<std::size_t>() << " failed\n";
  return kExitOk;
}

int cmd_plot(const Options& o) {
  const auto ds = qdsim::io::read_csv(o.in);
  const std::string svg = qdsim::plot::render_svg(ds);
  qdsim::io::atomic_write(out_path(o, fs::path(o.in).stem().string() + ".svg"), svg);
  return kExitOk;
}

int exit_code(const qdsim::Error& e) {
  switch (e.kind()) {
    case qdsim::ErrorKind::Domain:
    case qdsim::ErrorKind::Config: return kExitConfig;
    case qdsim::ErrorKind::Numeric: return kExitNumeric;
    case qdsim::ErrorKind::Io: return kExitIo;
  }
  return kExitInternal;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Digital twin of trion coherent control in a quantum dot"};
  app.require_subcommand(1);
  Options o;
  std::string drift = "off", correct = "off";

  auto add_common = [&](CLI::App* sub, bool needs_config) {
    if (needs_config) {
      sub->add_option("--config", o.config_path, "configuration file (defaults apply when omitted)");
      sub->add_option("--seed", o.seed, "override the configured seed");
      sub->add_option("--set", o.overrides, "override one configuration key, KEY=VALUE");
    }
    sub->add_option("--out", o.out, "output directory")->capture_default_str();
    sub->add_option("--drift", drift, "inject interferometer drift")->check(CLI::IsMember({"on", "off"}));
    sub->add_option("--correct", correct, "apply HeNe drift correction")->check(CLI::IsMember({"on", "off"}));
  };

  using Handler = int (*)(const Options&);
  struct Sub {
    const char* name;
    const char* help;
    Handler fn;
    bool config;
    bool input;
  };
  const Sub subs[] = {
      {"spectrum", "transition lines at --B, or the Zeeman fan", cmd_spectrum, true, false},
      {"rabi", "Rabi power sweep with background control", cmd_rabi, true, false},
      {"ramsey", "Ramsey fringes over the coarse and fine delay grid", cmd_ramsey, true, false},
      {"su2", "SU(2) map with its HeNe reference", cmd_su2, true, false},
      {"polarimetry", "rotating quarter-wave polarimetry of the four lines", cmd_polarimetry, true, false},
      {"correct-drift", "re-grid a drifted SU(2) map using its HeNe trace", cmd_correct_drift, true, true},
      {"fit-rabi", "background-subtracted Rabi fit", cmd_fit_rabi, false, true},
      {"fit-ramsey", "fringe contrasts and T2*", cmd_fit_ramsey, false, true},
      {"fit-zeeman", "Zeeman fan fit", cmd_fit_zeeman, false, true},
      {"fit-polarimetry", "Stokes vectors and DOCP", cmd_fit_polarimetry, false, true},
      {"reproduce", "full pipeline and acceptance criteria report", cmd_reproduce, true, false},
      {"plot", "render a dataset as SVG", cmd_plot, false, true},
  };
  Handler chosen = nullptr;
  for (const auto& s : subs) {
    auto* sub = app.add_subcommand(s.name, s.help);
    add_common(sub, s.config);
    if (s.input) sub->add_option("--in", o.in, "input CSV dataset")->required();
    if (std::string(s.name) == "spectrum") sub->add_option("--B", o.field, "magnetic field, T");
    if (std::string(s.name) == "correct-drift") sub->add_option("--hene", o.hene, "HeNe CSV dataset")->required();
    sub->callback([&chosen, fn = s.fn] { chosen = fn; });
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }
  o.drift = drift == "on";
  o.correct = correct == "on";

  try {
    std::error_code ec;
    fs::create_directories(o.out, ec);
    if (ec) throw qdsim::IoError("cannot create output directory '" + o.out + "'");
    return chosen(o);
  } catch (const qdsim::Error& e) {
    std::cerr << "qdsim: " << e.what() << "\n";
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "qdsim: internal error: " << e.what() << "\n";
    return kExitInternal;
  }
}
