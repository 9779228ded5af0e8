#pragma once

// Tabular results written as CSV. A report starts with "# key: value"
// metadata lines; each table follows as a "# table: name" line, a header
// row and data rows. Numbers are printed with the fewest digits (15 to 17)
// that round-trip, so output bytes depend only on the computed values.

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstdlib>
#include <deque>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "qheat/error.hpp"

namespace qheat {

inline constexpr std::string_view version = "0.1.0";

struct ResultTable {
  std::string name;
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;

  void add_row(std::vector<double> row) {
    require(row.size() == columns.size(), "table " + name + ": row has " + std::to_string(row.size()) + " values, expected " +
                                              std::to_string(columns.size()));
    rows.push_back(std::move(row));
  }
};

struct Report {
  std::vector<std::pair<std::string, std::string>> metadata;
  std::deque<ResultTable> tables;  // stable references from table()

  void meta(std::string key, std::string value) { metadata.emplace_back(std::move(key), std::move(value)); }
  ResultTable& table(std::string name, std::vector<std::string> columns) {
    tables.push_back({std::move(name), std::move(columns), {}});
    return tables.back();
  }
  std::string render() const;
};

inline std::string format_number(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  if (x == 0.0) return "0";
  // shortest %.Ng that reads back to the same double
  char buf[32];
  for (int digits = 15; digits <= 17; ++digits) {
    std::snprintf(buf, sizeof buf, "%.*g", digits, x);
    if (std::strtod(buf, nullptr) == x) break;
  }
  return buf;
}

inline std::string Report::render() const {
  std::string out;
  for (const auto& [key, value] : metadata) {
    out += "# " + key + ": ";
    for (char c : value) out += c == '\n' ? ' ' : c;
    out += '\n';
  }
  for (const auto& t : tables) {
    out += "# table: " + t.name + "\n";
    for (std::size_t i = 0; i < t.columns.size(); ++i) out += (i ? "," : "") + t.columns[i];
    out += '\n';
    for (const auto& row : t.rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out += (i ? "," : "") + format_number(row[i]);
      out += '\n';
    }
  }
  return out;
}

/// 64-bit FNV-1a, hex encoded.
inline std::string fnv1a_hex(std::string_view data) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : data) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace qheat
