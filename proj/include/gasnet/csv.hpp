#pragma once

#include <charconv>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "gasnet/errors.hpp"

namespace gasnet {

/// Minimal comma-separated table: first line is the header, blank lines and
/// lines starting with '#' are skipped. No quoting.
struct CsvTable {
  std::string source;
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  std::size_t column(const std::string& name) const {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (header[i] == name) return i;
    throw ValidationError(source + ": missing column '" + name + "'");
  }

  bool has_column(const std::string& name) const {
    for (const auto& h : header)
      if (h == name) return true;
    return false;
  }

  double number(std::size_t row, std::size_t col) const {
    const std::string& s = rows[row].at(col);
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size())
      throw ValidationError(source + ": row " + std::to_string(row + 2) + ": '" + s + "' is not a number");
    return v;
  }
};

namespace detail {

inline std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(std::string_view(line).substr(start, comma - start)));
    if (comma == std::string::npos) break;
    start = comma + 1;
  }
  return out;
}

} // namespace detail

inline CsvTable parse_csv(std::istream& in, const std::string& source) {
  CsvTable t;
  t.source = source;
  std::string line;
  while (std::getline(in, line)) {
    const std::string s = detail::trim(line);
    if (s.empty() || s[0] == '#') continue;
    auto fields = detail::split_fields(s);
    if (t.header.empty()) {
      t.header = std::move(fields);
      continue;
    }
    if (fields.size() != t.header.size())
      throw ValidationError(source + ": expected " + std::to_string(t.header.size()) + " fields, got " +
                            std::to_string(fields.size()) + " in '" + s + "'");
    t.rows.push_back(std::move(fields));
  }
  if (t.header.empty()) throw ValidationError(source + ": empty CSV file");
  return t;
}

inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open CSV file '" + path + "'");
  return parse_csv(in, path);
}

} // namespace gasnet
