#pragma once

#include <charconv>
#include <cstddef>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <utility>
#include <vector>

#include "qnet/error.hpp"

namespace qnet {

/// 17 significant digits: parses back to the identical double.
inline std::string format_double(double x) {
  char buf[64];
  const auto r = std::to_chars(buf, buf + sizeof buf, x, std::chars_format::general, 17);
  return std::string(buf, r.ptr);
}

inline double parse_double(std::string_view s) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto r = std::from_chars(s.data(), end, v);
  if (r.ec != std::errc() || r.ptr != end)
    throw Error(ErrorCode::ParseError, "not a number: '" + std::string(s) + "'");
  return v;
}

/// In-memory CSV with a "# key: value" metadata block above the column header.
struct CsvTable {
  std::vector<std::pair<std::string, std::string>> meta;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  void add_meta(std::string key, std::string value) { meta.emplace_back(std::move(key), std::move(value)); }

  std::string meta_value(std::string_view key) const {
    for (const auto& [k, v] : meta)
      if (k == key) return v;
    throw Error(ErrorCode::UnknownKey, "no metadata '" + std::string(key) + "'");
  }

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < columns.size(); ++i)
      if (columns[i] == name) return i;
    throw Error(ErrorCode::UnknownKey, "no column '" + std::string(name) + "'");
  }

  std::vector<double> numbers(std::string_view name) const {
    const auto c = column(name);
    std::vector<double> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(parse_double(r.at(c)));
    return out;
  }

  std::vector<std::string> strings(std::string_view name) const {
    const auto c = column(name);
    std::vector<std::string> out;
    out.reserve(rows.size());
    for (const auto& r : rows) out.push_back(r.at(c));
    return out;
  }
};

/// Row builder: numbers are written with format_double, strings verbatim.
class CsvRow {
 public:
  CsvRow& operator<<(double x) {
    cells_.push_back(format_double(x));
    return *this;
  }
  CsvRow& operator<<(int x) {
    cells_.push_back(std::to_string(x));
    return *this;
  }
  CsvRow& operator<<(std::string s) {
    cells_.push_back(std::move(s));
    return *this;
  }
  CsvRow& operator<<(const char* s) { return *this << std::string(s); }
  std::vector<std::string> take() { return std::move(cells_); }

 private:
  std::vector<std::string> cells_;
};

namespace detail {

inline std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string q = "\"";
  for (char c : s) {
    if (c == '"') q += '"';
    q += c;
  }
  return q + '"';
}

inline std::vector<std::string> csv_split(const std::string& line, std::size_t lineno) {
  std::vector<std::string> cells;
  std::string cur;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (quoted) throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": unterminated quote");
  cells.push_back(std::move(cur));
  return cells;
}

}  // namespace detail

inline void write_csv(std::ostream& os, const CsvTable& t) {
  for (const auto& [k, v] : t.meta) os << "# " << k << ": " << v << '\n';
  auto write_line = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) os << (i ? "," : "") << detail::csv_quote(cells[i]);
    os << '\n';
  };
  write_line(t.columns);
  for (const auto& r : t.rows) write_line(r);
}

inline std::string to_csv_string(const CsvTable& t) {
  std::ostringstream os;
  write_csv(os, t);
  return os.str();
}

inline CsvTable read_csv(std::istream& is) {
  CsvTable t;
  std::string line;
  std::size_t lineno = 0;
  bool have_header = false;
  while (std::getline(is, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!have_header && line.front() == '#') {
      const auto body = line.substr(line.size() > 1 && line[1] == ' ' ? 2 : 1);
      const auto colon = body.find(": ");
      if (colon == std::string::npos)
        t.add_meta(body, "");
      else
        t.add_meta(body.substr(0, colon), body.substr(colon + 2));
      continue;
    }
    auto cells = detail::csv_split(line, lineno);
    if (!have_header) {
      t.columns = std::move(cells);
      have_header = true;
    } else {
      if (cells.size() != t.columns.size())
        throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected " +
                                               std::to_string(t.columns.size()) + " fields, got " +
                                               std::to_string(cells.size()));
      t.rows.push_back(std::move(cells));
    }
  }
  return t;
}

inline CsvTable read_csv_string(const std::string& text) {
  std::istringstream is(text);
  return read_csv(is);
}

inline CsvTable read_csv_file(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw Error(ErrorCode::IoError, "cannot open '" + path + "'");
  return read_csv(is);
}

inline void write_csv_file(const std::string& path, const CsvTable& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw Error(ErrorCode::IoError, "cannot write '" + path + "'");
  write_csv(os, t);
  if (!os) throw Error(ErrorCode::IoError, "write failed for '" + path + "'");
}

}  // namespace qnet
