#include "qdsim/config.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <variant>

#include "qdsim/error.hpp"
#include "qdsim/format.hpp"

namespace qdsim::config {

namespace {

using Target = std::variant<double*, std::int64_t*, std::uint64_t*, std::vector<double>*>;

struct Field {
  std::string key;
  Target target;
};

std::vector<Field> fields(ExperimentConfig& c) {
  return {
      {"schema_version", &c.schema_version},
      {"seed", &c.seed},
      {"levels.B", &c.levels.field},
      {"levels.E0", &c.levels.e0},
      {"levels.gamma", &c.levels.gamma},
      {"levels.g_e", &c.levels.g_e},
      {"levels.g_h", &c.levels.g_h},
      {"levels.chi", &c.levels.chi},
      {"levels.docp", &c.levels.docp},
      {"levels.resolution", &c.levels.resolution},
      {"levels.fan_fields", &c.levels.fan_fields},
      {"levels.fan_noise", &c.levels.fan_noise},
      {"pulse.fwhm", &c.pulse.fwhm},
      {"pulse.kappa", &c.pulse.kappa},
      {"pulse.dt", &c.pulse.dt},
      {"pulse.detuning", &c.pulse.detuning},
      {"decoherence.t1", &c.decoherence.t1},
      {"decoherence.t2_star", &c.decoherence.t2_star},
      {"decoherence.branching_eta", &c.decoherence.branching_eta},
      {"decoherence.eid_coeff", &c.decoherence.eid_coeff},
      {"counts.rep_rate", &c.counts.rep_rate},
      {"counts.integration_time", &c.counts.integration_time},
      {"counts.efficiency", &c.counts.efficiency},
      {"counts.background_rate", &c.counts.background_rate},
      {"counts.incoherent_slope", &c.counts.incoherent_slope},
      {"counts.noise_scale", &c.counts.noise_scale},
      {"counts.leakage", &c.counts.leakage},
      {"schedule.coarse_start", &c.schedule.coarse_start},
      {"schedule.coarse_step", &c.schedule.coarse_step},
      {"schedule.n_coarse", &c.schedule.n_coarse},
      {"schedule.fine_span", &c.schedule.fine_span},
      {"schedule.n_fine", &c.schedule.n_fine},
      {"rabi.sqrt_power_max", &c.rabi.sqrt_power_max},
      {"rabi.n_points", &c.rabi.n_points},
      {"su2.coarse", &c.su2.coarse},
      {"su2.n_power", &c.su2.n_power},
      {"su2.n_fine", &c.su2.n_fine},
      {"su2.fine_span", &c.su2.fine_span},
      {"optics.lambda_qd", &c.optics.lambda_qd},
      {"optics.lambda_hene", &c.optics.lambda_hene},
      {"optics.hene_sign", &c.optics.hene_sign},
      {"drift.linear", &c.drift.linear},
      {"drift.sigma_rw", &c.drift.sigma_rw},
      {"drift.n_samples", &c.drift.n_samples},
      {"polarimetry.n_angles", &c.polarimetry.n_angles},
      {"polarimetry.intensity_noise", &c.polarimetry.intensity_noise},
  };
}

std::string trim(std::string s) {
  const auto ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  const auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

std::string strip_comment(const std::string& line) {
  const auto pos = line.find('#');
  return pos == std::string::npos ? line : line.substr(0, pos);
}

double as_number(const std::string& key, const std::string& v) {
  try {
    return parse_double(v);
  } catch (const DomainError&) {
    throw ConfigError("key '" + key + "': expected a number, got '" + v + "'");
  }
}

template <class Int>
Int as_integer(const std::string& key, const std::string& v) {
  const double d = as_number(key, v);
  if (d != std::floor(d) || (std::is_unsigned_v<Int> && d < 0))
    throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'");
  return static_cast<Int>(d);
}

void assign(const Field& f, const std::string& value) {
  std::visit(
      [&](auto* p) {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          *p = as_number(f.key, value);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          if (value.size() < 2 || value.front() != '[' || value.back() != ']')
            throw ConfigError("key '" + f.key + "': expected an array like [1, 2]");
          p->clear();
          std::stringstream ss(value.substr(1, value.size() - 2));
          std::string item;
          while (std::getline(ss, item, ',')) {
            item = trim(item);
            if (!item.empty()) p->push_back(as_number(f.key, item));
          }
        } else {
          *p = as_integer<T>(f.key, value);
        }
      },
      f.target);
}

std::string render(const Field& f) {
  return std::visit(
      [](auto* p) -> std::string {
        using T = std::remove_pointer_t<decltype(p)>;
        if constexpr (std::is_same_v<T, double>) {
          return format_double(*p);
        } else if constexpr (std::is_same_v<T, std::vector<double>>) {
          std::string s = "[";
          for (std::size_t k = 0; k < p->size(); ++k) s += (k ? ", " : "") + format_double((*p)[k]);
          return s + "]";
        } else {
          return std::to_string(*p);
        }
      },
      f.target);
}

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

}  // namespace

void ExperimentConfig::validate() const {
  require(schema_version == kSchemaVersion, "unsupported schema_version " + std::to_string(schema_version));
  require(levels.field >= 0.0, "levels.B must be >= 0");
  require(levels.gamma >= 0.0, "levels.gamma must be >= 0");
  require(std::isfinite(levels.g_e) && std::isfinite(levels.g_h) && std::isfinite(levels.e0), "levels: non-finite value");
  require(levels.chi >= 0.0 && levels.chi <= constants::kPi, "levels.chi must lie in [0, pi]");
  require(levels.docp >= 0.0 && levels.docp <= 1.0, "levels.docp must lie in [0, 1]");
  require(levels.resolution > 0.0, "levels.resolution must be > 0");
  require(levels.fan_noise >= 0.0, "levels.fan_noise must be >= 0");
  for (double b : levels.fan_fields) require(b >= 0.0, "levels.fan_fields must be >= 0");
  require(pulse.fwhm > 0.0, "pulse.fwhm must be > 0");
  require(pulse.kappa > 0.0, "pulse.kappa must be > 0");
  require(pulse.dt > 0.0 && pulse.dt <= pulse.fwhm / 50.0, "pulse.dt must lie in (0, fwhm/50]");
  require(decoherence.t1 > 0.0, "decoherence.t1 must be > 0");
  require(decoherence.t2_star > 0.0 && decoherence.t2_star <= 2.0 * decoherence.t1,
          "decoherence.t2_star must lie in (0, 2*t1]");
  require(decoherence.branching_eta >= 0.0 && decoherence.branching_eta <= 1.0,
          "decoherence.branching_eta must lie in [0, 1]");
  require(decoherence.eid_coeff >= 0.0, "decoherence.eid_coeff must be >= 0");
  require(counts.rep_rate > 0.0, "counts.rep_rate must be > 0");
  require(counts.integration_time > 0.0, "counts.integration_time must be > 0");
  require(counts.efficiency >= 0.0 && counts.background_rate >= 0.0 && counts.incoherent_slope >= 0.0,
          "counts: rates must be >= 0");
  require(counts.noise_scale >= 0.0, "counts.noise_scale must be >= 0");
  require(counts.leakage >= 0.0 && counts.leakage <= 1.0, "counts.leakage must lie in [0, 1]");
  require(schedule.coarse_start > 0.0 && schedule.coarse_step > 0.0 && schedule.fine_span > 0.0,
          "schedule: starts, steps and spans must be > 0");
  require(schedule.n_coarse >= 4u, "schedule.n_coarse must be >= 4");
  require(schedule.n_fine >= 16u, "schedule.n_fine must be >= 16");
  require(rabi.sqrt_power_max > 0.0 && rabi.n_points >= 8, "rabi: need sqrt_power_max > 0 and n_points >= 8");
  require(su2.coarse > 0.0 && su2.fine_span > 0.0 && su2.n_power >= 2 && su2.n_fine >= 2,
          "su2: grid must be positive and at least 2x2");
  require(optics.lambda_qd > 0.0 && optics.lambda_hene > 0.0, "optics: wavelengths must be > 0");
  require(optics.hene_sign == 1 || optics.hene_sign == -1, "optics.hene_sign must be 1 or -1");
  require(drift.sigma_rw >= 0.0 && drift.n_samples >= 2, "drift: sigma_rw >= 0 and n_samples >= 2 required");
  require(polarimetry.n_angles >= 16, "polarimetry.n_angles must be >= 16");
  require(polarimetry.intensity_noise >= 0.0, "polarimetry.intensity_noise must be >= 0");
}

levels::MagnetoParams ExperimentConfig::magneto() const {
  return {levels.e0, levels.gamma, levels.g_e, levels.g_h};
}

dynamics::DecoherenceParams ExperimentConfig::decoherence_params() const {
  return {decoherence.t1, decoherence.branching_eta,
          dynamics::DecoherenceParams::gamma_phi_for(decoherence.t2_star, decoherence.t1), decoherence.eid_coeff};
}

dynamics::CountModel ExperimentConfig::count_model() const {
  dynamics::CountModel m;
  m.rep_rate = counts.rep_rate;
  m.integration_time = counts.integration_time;
  m.efficiency = counts.efficiency;
  m.background_rate = counts.background_rate;
  m.incoherent_slope = counts.incoherent_slope;
  m.rng_seed = seed;
  m.sample = counts.noise_scale > 0.0;
  return m;
}

dynamics::SimOptions ExperimentConfig::sim_options() const {
  dynamics::SimOptions o;
  o.fwhm = pulse.fwhm;
  o.detuning = pulse.detuning;
  o.evolve.dt = pulse.dt;
  return o;
}

namespace {
std::vector<double> linspace(double lo, double hi, std::int64_t n) {
  std::vector<double> v(static_cast<std::size_t>(n));
  for (std::int64_t k = 0; k < n; ++k) v[k] = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(n - 1);
  return v;
}
}  // namespace

std::vector<double> ExperimentConfig::rabi_grid() const { return linspace(0.0, rabi.sqrt_power_max, rabi.n_points); }
std::vector<double> ExperimentConfig::su2_power_grid() const { return linspace(0.0, rabi.sqrt_power_max, su2.n_power); }
std::vector<double> ExperimentConfig::su2_fine_grid() const { return linspace(0.0, su2.fine_span, su2.n_fine); }
double ExperimentConfig::su2_duration() const {
  return counts.integration_time * static_cast<double>(su2.n_power * su2.n_fine);
}

ExperimentConfig parse(const std::string& text) {
  ExperimentConfig cfg;
  const auto table = fields(cfg);
  std::set<std::string> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string line = trim(strip_comment(raw));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("line " + std::to_string(line_no) + ": malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("line " + std::to_string(line_no) + ": expected key = value");
    const std::string name = trim(line.substr(0, eq));
    const std::string key = section.empty() ? name : section + "." + name;
    const std::string value = trim(line.substr(eq + 1));
    auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
    if (it == table.end()) throw ConfigError("line " + std::to_string(line_no) + ": unknown key '" + key + "'");
    if (!seen.insert(key).second) throw ConfigError("line " + std::to_string(line_no) + ": duplicate key '" + key + "'");
    assign(*it, value);
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot read config '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return parse(ss.str());
}

std::string to_text(const ExperimentConfig& c) {
  ExperimentConfig copy = c;
  const auto table = fields(copy);
  std::ostringstream out;
  std::string section;
  for (const auto& f : table) {
    const auto dot = f.key.find('.');
    const std::string sec = dot == std::string::npos ? "" : f.key.substr(0, dot);
    const std::string name = dot == std::string::npos ? f.key : f.key.substr(dot + 1);
    if (sec != section) {
      out << "\n[" << sec << "]\n";
      section = sec;
    }
    out << name << " = " << render(f) << "\n";
  }
  return out.str();
}

void set_value(ExperimentConfig& cfg, const std::string& key, const std::string& value) {
  const auto table = fields(cfg);
  auto it = std::find_if(table.begin(), table.end(), [&](const Field& f) { return f.key == key; });
  if (it == table.end()) throw ConfigError("unknown key '" + key + "'");
  assign(*it, value);
}

std::string config_hash(const ExperimentConfig& cfg) {
  const std::string text = to_text(cfg);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(text.data(), text.size(), digest, &len, EVP_sha256(), nullptr) != 1)
    throw IoError("SHA-256 failed");
  static const char* hex = "0123456789abcdef";
  std::string out;
  for (unsigned int k = 0; k < len; ++k) {
    out += hex[digest[k] >> 4];
    out += hex[digest[k] & 15];
  }
  return out;
}

}  // namespace qdsim::config
