#pragma once

#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

namespace restrlab {

using Cell = std::variant<double, std::string>;

// Tabular experiment output. `pass` is the conjunction of the row verdicts
// and any summary-level checks.
struct Report {
  std::string name;
  std::string config_hash;
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;
  nlohmann::ordered_json summary = nlohmann::ordered_json::object();
  bool pass = true;
  double wall_time = 0;

  void add_row(std::vector<Cell> row);
  // Appends a verdict; a failing one clears `pass`.
  void check(const std::string& key, bool ok);
};

// Twelve significant digits, the format used for every number written out.
std::string format_number(double x);

// FNV-1a over the canonical (sorted-key) dump of a JSON value.
std::string config_hash(const nlohmann::json& config);

std::string to_csv(const Report& r);
nlohmann::ordered_json to_json(const Report& r, bool with_timing = false);
// Inverse of to_json; numbers come back at the 12-digit precision they were written with.
Report report_from_json(const nlohmann::ordered_json& j);

enum class Format { Csv, Json };
// Temp file in the target directory followed by rename; throws IoFailure.
void write_atomic(const std::filesystem::path& path, const std::string& content);
void emit(const Report& r, Format f, const std::filesystem::path& path, bool with_timing = false);

}  // namespace restrlab
