#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace efimov::io {

inline constexpr const char *kVersion = "0.3.0";

// Empty cell, number, or text.
using Cell = std::variant<std::monostate, double, std::string>;

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  void add(std::vector<Cell> row) {
    if (row.size() != header.size())
      throw std::logic_error("csv row width does not match header");
    rows.push_back(std::move(row));
  }
};

// 12 significant digits, shortest of fixed/exponent form.
inline std::string format_number(double v) {
  if (std::isnan(v))
    return "nan";
  if (std::isinf(v))
    return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v == 0.0 ? 0.0 : v);
  return buf;
}

inline std::string quote_field(const std::string &s) {
  if (s.find_first_of(",\"\r\n") == std::string::npos)
    return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"')
      out += '"';
    out += c;
  }
  return out + '"';
}

inline std::string format_cell(const Cell &c) {
  if (std::holds_alternative<double>(c))
    return format_number(std::get<double>(c));
  if (std::holds_alternative<std::string>(c))
    return quote_field(std::get<std::string>(c));
  return {};
}

// '# efimov-kit <version> <command> <hash>' then header and rows, CRLF
// line ends.
inline void write_csv(std::ostream &os, const CsvTable &t, const std::string &command,
                      const std::string &config_hash) {
  os << "# efimov-kit " << kVersion << ' ' << command << ' '
     << (config_hash.empty() ? "-" : config_hash) << "\r\n";
  for (std::size_t i = 0; i < t.header.size(); ++i)
    os << (i ? "," : "") << quote_field(t.header[i]);
  os << "\r\n";
  for (const auto &row : t.rows) {
    for (std::size_t i = 0; i < row.size(); ++i)
      os << (i ? "," : "") << format_cell(row[i]);
    os << "\r\n";
  }
}

inline std::string to_csv(const CsvTable &t, const std::string &command,
                          const std::string &config_hash) {
  std::ostringstream os;
  write_csv(os, t, command, config_hash);
  return os.str();
}

} // namespace efimov::io
