#include <unistd.h>

#include <cmath>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <random>
#include <string>

#include <doctest.h>
#include <json.hpp>

#include "qdsim/config.hpp"
#include "qdsim/dataset.hpp"
#include "qdsim/error.hpp"
#include "qdsim/format.hpp"
#include "qdsim/svg_plot.hpp"

using namespace qdsim;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / ("qdsim_io_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

io::Dataset sample_dataset() {
  io::Dataset ds;
  ds.kind = io::DatasetKind::Rabi;
  ds.set_meta("config_hash", std::string(64, 'a'));
  ds.set_meta("seed", "7");
  ds.add_column("sqrt_power", "uW^0.5", {0.0, 0.1, 1.0 / 3.0, 2.5});
  ds.add_column("counts", "", {351.5625, 1e-300, 12345.678901234567, -0.0});
  return ds;
}

// Ideal SU(2) map sin²θ·cos²(φ/2) over θ ∈ [0, 4π], 12 fs of fine delay.
io::Dataset ideal_map(std::size_t rows, std::size_t cols) {
  io::Dataset ds;
  ds.kind = io::DatasetKind::Su2Map;
  ds.set_meta("config_hash", "h");
  ds.set_meta("seed", "1");
  std::vector<double> sp, fd, c;
  const double period = 880.0 / constants::kSpeedOfLight;
  for (std::size_t r = 0; r < rows; ++r)
    for (std::size_t k = 0; k < cols; ++k) {
      const double s = 2.5 * static_cast<double>(r) / static_cast<double>(rows - 1);
      const double f = 12.0 * static_cast<double>(k) / static_cast<double>(cols - 1);
      const double theta = s * 4 * constants::kPi / 2.5;
      const double phi = 2 * constants::kPi * f / period;
      sp.push_back(s);
      fd.push_back(f);
      c.push_back(std::pow(std::sin(theta), 2) * std::pow(std::cos(phi / 2), 2));
    }
  ds.add_column("sqrt_power", "uW^0.5", sp);
  ds.add_column("fine_delay_fs", "fs", fd);
  ds.add_column("counts", "", c);
  ds.add_column("timestamp_s", "s", std::vector<double>(c.size(), 0.0));
  return ds;
}

std::size_t count_of(const std::string& s, const std::string& needle) {
  std::size_t n = 0;
  for (auto p = s.find(needle); p != std::string::npos; p = s.find(needle, p + 1)) ++n;
  return n;
}

}  // namespace

TEST_CASE("double formatting round trips") {
  std::mt19937_64 gen(1);
  std::uniform_real_distribution<double> u(-1e6, 1e6);
  for (int i = 0; i < 1000; ++i) {
    const double v = u(gen) * std::pow(10.0, i % 40 - 20);
    CHECK(parse_double(format_double(v)) == v);
  }
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
  CHECK(std::isnan(parse_double("nan")));
  CHECK(parse_double("-inf") == -std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(parse_double("1.0x"), DomainError);
  CHECK_THROWS_AS(parse_double(""), DomainError);
}

TEST_CASE("config parsing") {
  SUBCASE("defaults validate") { CHECK_NOTHROW(config::ExperimentConfig{}.validate()); }
  SUBCASE("sections and arrays") {
    const auto c = config::parse(
        "# comment\nschema_version = 1\nseed = 42\n[levels]\nB = 3.5  # tesla\nfan_fields = [0, 2.5, 5]\n"
        "[pulse]\nfwhm = 2.0\n");
    CHECK(c.seed == 42);
    CHECK(c.levels.field == 3.5);
    CHECK(c.levels.fan_fields == std::vector<double>{0.0, 2.5, 5.0});
    CHECK(c.pulse.fwhm == 2.0);
    CHECK(c.pulse.kappa == config::ExperimentConfig{}.pulse.kappa);
  }
  SUBCASE("unknown key") { CHECK_THROWS_AS(config::parse("[pulse]\nfwmh = 2\n"), ConfigError); }
  SUBCASE("unknown section") { CHECK_THROWS_AS(config::parse("[pulses]\nfwhm = 2\n"), ConfigError); }
  SUBCASE("duplicate key") { CHECK_THROWS_AS(config::parse("[pulse]\nfwhm = 2\nfwhm = 3\n"), ConfigError); }
  SUBCASE("type error") {
    CHECK_THROWS_AS(config::parse("seed = 1.5\n"), ConfigError);
    CHECK_THROWS_AS(config::parse("[pulse]\nfwhm = fast\n"), ConfigError);
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(config::parse("[pulse]\nfwhm = -1\n"), ConfigError);
    CHECK_THROWS_AS(config::parse("[optics]\nhene_sign = 0\n"), ConfigError);
    config::ExperimentConfig c;
    c.su2.n_fine = 1;
    CHECK_THROWS_AS(c.validate(), ConfigError);
  }
  SUBCASE("missing file") { CHECK_THROWS_AS(config::load("/nonexistent/qdsim.toml"), IoError); }
}

TEST_CASE("canonical text and hash") {
  config::ExperimentConfig c;
  c.seed = 99;
  c.pulse.fwhm = 2.75;
  c.levels.fan_fields = {0.5, 1.5, 4.0};
  const auto text = config::to_text(c);
  const auto back = config::parse(text);
  CHECK(config::to_text(back) == text);
  CHECK(config::config_hash(back) == config::config_hash(c));
  CHECK(config::config_hash(c).size() == 64);

  auto d = c;
  config::set_value(d, "pulse.fwhm", "2.7500000000000004");
  CHECK(config::config_hash(d) != config::config_hash(c));
  CHECK_THROWS_AS(config::set_value(d, "pulse.nope", "1"), ConfigError);
  // Whitespace and comments do not change the hash.
  const auto loose = config::parse("seed = 99\n\n[pulse]\n  fwhm   =   2.75   # ps\n[levels]\nfan_fields=[0.5,1.5,4]\n");
  CHECK(config::config_hash(loose) == config::config_hash(c));
}

TEST_CASE("csv round trip is bitwise") {
  const auto ds = sample_dataset();
  const auto text = io::to_csv(ds);
  CHECK(text.rfind("# kind: Rabi", 0) == 0);
  CHECK(text.find("sqrt_power[uW^0.5],counts[]") != std::string::npos);
  const auto back = io::parse_csv(text);
  CHECK(back.kind == ds.kind);
  CHECK(back.metadata == ds.metadata);
  REQUIRE(back.columns.size() == ds.columns.size());
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    CHECK(back.columns[c].name == ds.columns[c].name);
    CHECK(back.columns[c].unit == ds.columns[c].unit);
    for (std::size_t r = 0; r < ds.rows(); ++r)
      CHECK(std::memcmp(&back.columns[c].values[r], &ds.columns[c].values[r], sizeof(double)) == 0);
  }
  CHECK(io::to_csv(back) == text);
}

TEST_CASE("csv schema errors") {
  CHECK_THROWS_AS(io::parse_csv("# kind: Rabi\n# config_hash: x\n# seed: 1\n"), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("# kind: Rabi\n# config_hash: x\n# seed: 1\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("# kind: Rabi\n# seed: 1\na[],b[]\n1,2\n"), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("# kind: Rabi\n# config_hash: x\n# seed: 1\na[],b[]\n1,2,3\n"), SchemaError);
  CHECK_THROWS_AS(io::parse_csv("# kind: Nope\n# config_hash: x\n# seed: 1\na[]\n1\n"), SchemaError);
  auto ds = sample_dataset();
  ds.columns[1].values.pop_back();
  CHECK_THROWS_AS(ds.validate(), SchemaError);
  CHECK_THROWS_AS(sample_dataset().column("missing"), SchemaError);
}

TEST_CASE("files are written atomically") {
  const auto path = scratch("rabi.csv");
  io::export_dataset(sample_dataset(), path);
  CHECK(fs::exists(path));
  const auto sidecar = fs::path(path).replace_extension(".json");
  REQUIRE(fs::exists(sidecar));
  const auto j = nlohmann::json::parse(io::read_file(sidecar));
  CHECK(j["kind"] == "Rabi");
  CHECK(j["rows"] == 4);
  CHECK(j["metadata"]["config_hash"] == std::string(64, 'a'));
  CHECK(j["metadata"]["seed"] == "7");
  CHECK(j["columns"][1]["name"] == "counts");
  CHECK(io::read_csv(path).rows() == 4);
  for (const auto& e : fs::directory_iterator(path.parent_path()))
    CHECK(e.path().filename().string().find(".tmp") == std::string::npos);
  CHECK_THROWS_AS(io::atomic_write("/proc/qdsim/x.csv", "x"), IoError);
  CHECK_THROWS_AS(io::read_file(path.parent_path() / "absent.csv"), IoError);
  fs::remove_all(path.parent_path());
}

TEST_CASE("svg rendering") {
  const auto ds = sample_dataset();
  const auto a = plot::render_svg(ds);
  CHECK(a == plot::render_svg(ds));
  CHECK(a.find("<svg") != std::string::npos);
  CHECK(a.find("</svg>") != std::string::npos);
  CHECK(a.find(std::string(64, 'a')) != std::string::npos);

  io::Dataset empty = ds;
  for (auto& c : empty.columns) c.values.clear();
  CHECK_THROWS_AS(plot::render_svg(empty), DomainError);
}

TEST_CASE("ideal map shows the multilobed structure") {
  const std::size_t rows = 64, cols = 128;
  const auto ds = ideal_map(rows, cols);
  const auto& v = ds.column("counts").values;
  const auto peaks = plot::find_grid_maxima(rows, cols, v);
  // θ = π/2 + kπ for k = 0..3 and φ = 2nπ for the five fringes inside 12 fs.
  const double period = 880.0 / constants::kSpeedOfLight;
  const std::size_t n_phi = static_cast<std::size_t>(std::floor(12.0 / period)) + 1;
  CHECK(peaks.size() == 4 * n_phi);
  for (const auto& p : peaks) {
    const double theta = ds.column("sqrt_power").values[p.row * cols] * 4 * constants::kPi / 2.5;
    const double f = ds.column("fine_delay_fs").values[p.col];
    const double k = (theta - constants::kPi / 2) / constants::kPi;
    const double n = f / period;
    CHECK(std::abs(k - std::round(k)) < 0.05);
    CHECK(std::abs(n - std::round(n)) < 0.05);
  }
  const auto svg = plot::render_svg(ds);
  CHECK(count_of(svg, "class=\"lobe\"") == peaks.size());
}

TEST_CASE("shipped default config matches the built-in defaults") {
  const auto cfg = config::load(std::string(QDSIM_SOURCE_DIR) + "/configs/default.toml");
  CHECK(config::config_hash(cfg) == config::config_hash(config::ExperimentConfig{}));
}
