#pragma once

// Tabular datasets and their CSV / JSON serialization. Every dataset carries
// the config hash and seed that produced it.

#include <filesystem>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace qdsim::io {

enum class DatasetKind { Spectrum, Rabi, Ramsey, Su2Map, Polarimetry, HeNe };

std::string_view kind_name(DatasetKind kind);
/// Throws SchemaError for unknown names.
DatasetKind kind_from_name(std::string_view name);

struct Column {
  std::string name;
  std::string unit;
  std::vector<double> values;
};

struct Dataset {
  DatasetKind kind = DatasetKind::Rabi;
  std::vector<Column> columns;
  /// Ordered key/value pairs; "config_hash" and "seed" are mandatory.
  std::vector<std::pair<std::string, std::string>> metadata;

  std::size_t rows() const;
  /// Throws SchemaError on ragged columns, no columns, or missing hash/seed.
  void validate() const;
  /// Throws SchemaError if absent.
  const Column& column(std::string_view name) const;
  bool has_column(std::string_view name) const;
  /// Empty string if absent.
  std::string meta(std::string_view key) const;
  void set_meta(const std::string& key, const std::string& value);
  Column& add_column(std::string name, std::string unit, std::vector<double> values);
};

/// `#`-prefixed metadata lines, a `name[unit]` header row, then one row per
/// sample with 17 significant digits.
std::string to_csv(const Dataset& ds);
Dataset parse_csv(const std::string& text);

std::string to_json(const Dataset& ds);

/// Writes to a sibling temporary file, then renames into place.
void atomic_write(const std::filesystem::path& path, const std::string& content);
std::string read_file(const std::filesystem::path& path);

void write_csv(const Dataset& ds, const std::filesystem::path& path);
Dataset read_csv(const std::filesystem::path& path);
/// CSV plus a `.json` sidecar next to it.
void export_dataset(const Dataset& ds, const std::filesystem::path& csv_path);

}  // namespace qdsim::io
