#include "restrlab/report.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <unistd.h>

#include "restrlab/errors.hpp"

namespace restrlab {

void Report::add_row(std::vector<Cell> row) {
  if (row.size() != columns.size()) throw InvalidArgument("report row width does not match the header");
  rows.push_back(std::move(row));
}

void Report::check(const std::string& key, bool ok) {
  summary["checks"][key] = ok;
  pass = pass && ok;
}

std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.12g", x);
  return buf;
}

std::string config_hash(const nlohmann::json& config) {
  const std::string s = config.dump();  // std::map keys: sorted and canonical
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

namespace {

std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::string cell_text(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) return format_number(*d);
  return csv_escape(std::get<std::string>(c));
}

nlohmann::ordered_json cell_json(const Cell& c) {
  if (const auto* d = std::get_if<double>(&c)) {
    if (!std::isfinite(*d)) return format_number(*d);
    // Round-trip through the 12-digit text so JSON and CSV agree.
    return std::stod(format_number(*d));
  }
  return std::get<std::string>(c);
}

}  // namespace

std::string to_csv(const Report& r) {
  std::ostringstream os;
  for (std::size_t i = 0; i < r.columns.size(); ++i) os << (i ? "," : "") << csv_escape(r.columns[i]);
  os << "\n";
  for (const auto& row : r.rows) {
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << cell_text(row[i]);
    os << "\n";
  }
  return os.str();
}

nlohmann::ordered_json to_json(const Report& r, bool with_timing) {
  nlohmann::ordered_json j;
  j["experiment"] = r.name;
  j["config_hash"] = r.config_hash;
  j["pass"] = r.pass;
  j["columns"] = r.columns;
  auto rows = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    auto jr = nlohmann::ordered_json::array();
    for (const auto& c : row) jr.push_back(cell_json(c));
    rows.push_back(jr);
  }
  j["rows"] = rows;
  j["summary"] = r.summary;
  if (with_timing) j["wall_time"] = r.wall_time;
  return j;
}

Report report_from_json(const nlohmann::ordered_json& j) {
  Report r;
  r.name = j.at("experiment").get<std::string>();
  r.config_hash = j.at("config_hash").get<std::string>();
  r.pass = j.at("pass").get<bool>();
  r.columns = j.at("columns").get<std::vector<std::string>>();
  for (const auto& jr : j.at("rows")) {
    std::vector<Cell> row;
    for (const auto& c : jr) {
      if (c.is_number()) row.emplace_back(c.get<double>());
      else row.emplace_back(c.get<std::string>());
    }
    r.rows.push_back(std::move(row));
  }
  r.summary = j.at("summary");
  if (j.contains("wall_time")) r.wall_time = j.at("wall_time").get<double>();
  return r;
}

void write_atomic(const std::filesystem::path& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = path.has_parent_path() ? path.parent_path() : fs::path(".");
  std::error_code ec;
  if (!fs::exists(dir, ec)) throw IoFailure("directory does not exist: " + dir.string());
  const fs::path tmp = dir / ("." + path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoFailure("cannot open " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      fs::remove(tmp, ec);
      throw IoFailure("write failed for " + tmp.string());
    }
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoFailure("rename to " + path.string() + " failed");
  }
}

void emit(const Report& r, Format f, const std::filesystem::path& path, bool with_timing) {
  if (f == Format::Csv) write_atomic(path, to_csv(r));
  else write_atomic(path, to_json(r, with_timing).dump(2) + "\n");
}

}  // namespace restrlab
