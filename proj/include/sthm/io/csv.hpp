#pragma once

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <sstream>
#include <string>
#include <vector>

#include "sthm/numerics/errors.hpp"

namespace sthm::io {

// Shortest-safe round-trip formatting for doubles.
inline std::string format_double(double v) {
  if (!std::isfinite(v)) throw PoisonedOutput("non-finite value in table output");
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  const std::vector<std::string>& columns() const { return columns_; }
  std::size_t rows() const { return rows_.size(); }
  const std::vector<std::string>& row(std::size_t i) const { return rows_[i]; }

  void add(std::vector<std::string> cells) {
    if (cells.size() != columns_.size()) throw ConsistencyError("row width does not match the table header");
    rows_.push_back(std::move(cells));
  }

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < columns_.size(); ++i)
      if (columns_[i] == name) return i;
    throw FormatError("table has no column '" + name + "'");
  }

  double number(std::size_t r, const std::string& name) const {
    const std::string& s = rows_[r][column(name)];
    char* end = nullptr;
    const double v = std::strtod(s.c_str(), &end);
    if (end == s.c_str() || *end != '\0') throw FormatError("cell '" + s + "' is not a number");
    return v;
  }

  const std::string& text(std::size_t r, const std::string& name) const { return rows_[r][column(name)]; }

  std::string str() const {
    std::string out;
    auto line = [&](const std::vector<std::string>& cells) {
      for (std::size_t i = 0; i < cells.size(); ++i) out += (i ? "," : "") + cells[i];
      out += '\n';
    };
    line(columns_);
    for (const auto& r : rows_) line(r);
    return out;
  }

  static CsvTable parse(const std::string& text) {
    std::istringstream in(text);
    std::string l;
    if (!std::getline(in, l)) throw FormatError("empty table");
    CsvTable t(split(l));
    while (std::getline(in, l))
      if (!l.empty()) t.add(split(l));
    return t;
  }

 private:
  static std::vector<std::string> split(const std::string& l) {
    std::vector<std::string> cells;
    std::string c;
    std::istringstream ss(l);
    while (std::getline(ss, c, ',')) cells.push_back(c);
    if (!l.empty() && l.back() == ',') cells.emplace_back();
    return cells;
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<std::string>> rows_;
};

}  // namespace sthm::io
