#include "qdsim/dataset.hpp"

#include <unistd.h>

#include <algorithm>
#include <array>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "qdsim/error.hpp"
#include "qdsim/format.hpp"

namespace qdsim::io {

namespace {

constexpr std::array<std::pair<DatasetKind, std::string_view>, 6> kKinds{{
    {DatasetKind::Spectrum, "Spectrum"},
    {DatasetKind::Rabi, "Rabi"},
    {DatasetKind::Ramsey, "Ramsey"},
    {DatasetKind::Su2Map, "Su2Map"},
    {DatasetKind::Polarimetry, "Polarimetry"},
    {DatasetKind::HeNe, "HeNe"},
}};

std::string trim(std::string s) {
  const auto ws = " \t\r";
  s.erase(0, s.find_first_not_of(ws));
  const auto end = s.find_last_not_of(ws);
  s.erase(end == std::string::npos ? 0 : end + 1);
  return s;
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> out;
  std::stringstream ss(line);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(trim(item));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

std::string_view kind_name(DatasetKind kind) {
  for (const auto& [k, n] : kKinds)
    if (k == kind) return n;
  return "Unknown";
}

DatasetKind kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kKinds)
    if (n == name) return k;
  throw SchemaError("unknown dataset kind '" + std::string(name) + "'");
}

std::size_t Dataset::rows() const { return columns.empty() ? 0 : columns.front().values.size(); }

void Dataset::validate() const {
  if (columns.empty()) throw SchemaError("dataset has no columns");
  for (const auto& c : columns) {
    if (c.name.empty()) throw SchemaError("unnamed column");
    if (c.values.size() != rows()) throw SchemaError("column '" + c.name + "' length differs from the others");
  }
  if (meta("config_hash").empty()) throw SchemaError("missing config_hash metadata");
  if (meta("seed").empty()) throw SchemaError("missing seed metadata");
}

const Column& Dataset::column(std::string_view name) const {
  for (const auto& c : columns)
    if (c.name == name) return c;
  throw SchemaError("no column '" + std::string(name) + "'");
}

bool Dataset::has_column(std::string_view name) const {
  return std::any_of(columns.begin(), columns.end(), [&](const Column& c) { return c.name == name; });
}

std::string Dataset::meta(std::string_view key) const {
  for (const auto& [k, v] : metadata)
    if (k == key) return v;
  return {};
}

void Dataset::set_meta(const std::string& key, const std::string& value) {
  for (auto& [k, v] : metadata)
    if (k == key) {
      v = value;
      return;
    }
  metadata.emplace_back(key, value);
}

Column& Dataset::add_column(std::string name, std::string unit, std::vector<double> values) {
  columns.push_back({std::move(name), std::move(unit), std::move(values)});
  return columns.back();
}

std::string to_csv(const Dataset& ds) {
  ds.validate();
  std::string out;
  out += "# kind: " + std::string(kind_name(ds.kind)) + "\n";
  for (const auto& [k, v] : ds.metadata) out += "# " + k + ": " + v + "\n";
  for (std::size_t c = 0; c < ds.columns.size(); ++c) {
    if (c) out += ',';
    out += ds.columns[c].name + "[" + ds.columns[c].unit + "]";
  }
  out += '\n';
  for (std::size_t r = 0; r < ds.rows(); ++r) {
    for (std::size_t c = 0; c < ds.columns.size(); ++c) {
      if (c) out += ',';
      out += format_double(ds.columns[c].values[r]);
    }
    out += '\n';
  }
  return out;
}

Dataset parse_csv(const std::string& text) {
  Dataset ds;
  bool have_kind = false;
  bool have_header = false;
  std::istringstream in(text);
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    if (line.front() == '#') {
      if (have_header) throw SchemaError("metadata after header at line " + std::to_string(line_no));
      const std::string body = trim(line.substr(1));
      const auto colon = body.find(':');
      if (colon == std::string::npos) continue;
      const std::string key = trim(body.substr(0, colon));
      const std::string value = trim(body.substr(colon + 1));
      if (key == "kind") {
        ds.kind = kind_from_name(value);
        have_kind = true;
      } else {
        ds.set_meta(key, value);
      }
      continue;
    }
    const auto cells = split(line);
    if (!have_header) {
      for (const auto& cell : cells) {
        const auto lb = cell.find('[');
        if (lb == std::string::npos || cell.back() != ']' || lb == 0)
          throw SchemaError("line " + std::to_string(line_no) + ": expected a name[unit] header, got '" + cell + "'");
        ds.add_column(cell.substr(0, lb), cell.substr(lb + 1, cell.size() - lb - 2), {});
      }
      have_header = true;
      continue;
    }
    if (cells.size() != ds.columns.size())
      throw SchemaError("line " + std::to_string(line_no) + ": expected " + std::to_string(ds.columns.size()) +
                        " cells, got " + std::to_string(cells.size()));
    for (std::size_t c = 0; c < cells.size(); ++c) {
      try {
        ds.columns[c].values.push_back(parse_double(cells[c]));
      } catch (const DomainError& e) {
        throw SchemaError("line " + std::to_string(line_no) + ": " + e.what());
      }
    }
  }
  if (!have_header) throw SchemaError("missing header row");
  if (!have_kind) throw SchemaError("missing kind metadata");
  ds.validate();
  return ds;
}

std::string to_json(const Dataset& ds) {
  ds.validate();
  nlohmann::ordered_json j;
  j["kind"] = kind_name(ds.kind);
  j["rows"] = ds.rows();
  nlohmann::ordered_json meta = nlohmann::ordered_json::object();
  for (const auto& [k, v] : ds.metadata) meta[k] = v;
  j["metadata"] = meta;
  nlohmann::ordered_json cols = nlohmann::ordered_json::array();
  for (const auto& c : ds.columns) cols.push_back({{"name", c.name}, {"unit", c.unit}});
  j["columns"] = cols;
  return j.dump(2) + "\n";
}

void atomic_write(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (path.has_parent_path()) fs::create_directories(path.parent_path(), ec);
  fs::path tmp = path;
  tmp += ".tmp." + std::to_string(::getpid());
  {
    std::ofstream f(tmp, std::ios::binary | std::ios::trunc);
    if (!f) throw IoError("cannot write '" + tmp.string() + "'");
    f.write(content.data(), static_cast<std::streamsize>(content.size()));
    f.flush();
    if (!f) {
      f.close();
      fs::remove(tmp, ec);
      throw IoError("short write to '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename into '" + path.string() + "'");
  }
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot read '" + path.string() + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

void write_csv(const Dataset& ds, const std::filesystem::path& path) { atomic_write(path, to_csv(ds)); }

Dataset read_csv(const std::filesystem::path& path) { return parse_csv(read_file(path)); }

void export_dataset(const Dataset& ds, const std::filesystem::path& csv_path) {
  write_csv(ds, csv_path);
  auto sidecar = csv_path;
  sidecar.replace_extension(".json");
  atomic_write(sidecar, to_json(ds));
}

}  // namespace qdsim::io
