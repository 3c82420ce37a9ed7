#pragma once

#include <charconv>
#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "dioex/core.hpp"

namespace dioex {

using Json = nlohmann::ordered_json;

// Shortest decimal that parses back to the same double.
inline std::string format_real(double x) {
  char buf[64];
  auto [p, ec] = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, p);
}

inline Json json_document(const std::string& kind) {
  Json j;
  j["schema"] = kSchemaVersion;
  j["kind"] = kind;
  return j;
}

// CSV with a leading `# dioex/1 <kind>` line and a header row.
class CsvTable {
 public:
  CsvTable(std::string kind, std::vector<std::string> columns) : kind_(std::move(kind)), columns_(std::move(columns)) {}

  template <class... Cells>
  void row(const Cells&... cells) {
    std::vector<std::string> r;
    (r.push_back(cell(cells)), ...);
    add(std::move(r));
  }

  void add(std::vector<std::string> r) {
    require(r.size() == columns_.size(), "row width does not match the header");
    rows_.push_back(std::move(r));
  }

  std::string str() const {
    std::string out = "# " + std::string(kSchemaVersion) + " " + kind_ + "\n";
    out += join(columns_);
    for (const auto& r : rows_) out += join(r);
    return out;
  }

  static std::string cell(double x) { return format_real(x); }
  static std::string cell(int x) { return std::to_string(x); }
  static std::string cell(std::int64_t x) { return std::to_string(x); }
  static std::string cell(std::uint64_t x) { return std::to_string(x); }
  static std::string cell(const std::string& s) { return s; }
  static std::string cell(const char* s) { return s; }

 private:
  static std::string join(const std::vector<std::string>& r) {
    std::string s;
    for (std::size_t i = 0; i < r.size(); ++i) {
      if (i) s += ',';
      s += r[i];
    }
    return s + "\n";
  }

  std::string kind_;
  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

struct CsvData {
  std::string kind;  // from the schema line, if any
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return static_cast<int>(i);
    throw ParseError("CSV has no column '" + name + "'");
  }
};

// Reads CSV written by CsvTable or a plain table. A first row that does not parse
// as numbers is taken as the header.
inline CsvData read_csv(std::istream& in) {
  CsvData d;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::istringstream h(line.substr(1));
      std::string schema;
      h >> schema >> d.kind;
      continue;
    }
    std::vector<std::string> cells;
    std::string c;
    std::istringstream ls(line);
    while (std::getline(ls, c, ',')) cells.push_back(c);
    if (first) {
      first = false;
      bool numeric = true;
      for (const auto& s : cells) {
        double v;
        auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
        numeric = numeric && ec == std::errc() && p == s.data() + s.size();
      }
      if (!numeric) {
        d.columns = cells;
        continue;
      }
      for (std::size_t i = 0; i < cells.size(); ++i) d.columns.push_back("c" + std::to_string(i + 1));
    }
    if (cells.size() != d.columns.size()) throw ParseError("ragged CSV row: " + line);
    d.rows.push_back(std::move(cells));
  }
  return d;
}

inline double csv_real(const std::string& s) {
  double v = 0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || p != s.data() + s.size() || s.empty()) throw ParseError("not a number in CSV: '" + s + "'");
  return v;
}

}  // namespace dioex
