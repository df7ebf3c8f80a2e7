#pragma once

#include <charconv>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace ergo::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> comments;    // leading '#' lines, '#' stripped
  std::vector<std::size_t> row_lines;   // 1-based source line per data row
};

inline std::string trim(std::string_view s) {
  const char* ws = " \t\r\n";
  auto b = s.find_first_not_of(ws);
  if (b == std::string_view::npos) return {};
  auto e = s.find_last_not_of(ws);
  return std::string(s.substr(b, e - b + 1));
}

inline std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::stringstream ss(line);
  while (std::getline(ss, cell, ',')) out.push_back(trim(cell));
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline Table read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open CSV file: " + path);
  Table t;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    std::string s = trim(line);
    if (s.empty()) continue;
    if (s.front() == '#') {
      if (!header_seen) t.comments.push_back(trim(s.substr(1)));
      continue;
    }
    if (!header_seen) {
      t.header = split_line(s);
      header_seen = true;
      continue;
    }
    t.rows.push_back(split_line(s));
    t.row_lines.push_back(lineno);
  }
  if (!header_seen) throw std::runtime_error("CSV file has no header: " + path);
  return t;
}

inline std::size_t column(const Table& t, const std::string& name) {
  for (std::size_t i = 0; i < t.header.size(); ++i)
    if (t.header[i] == name) return i;
  throw std::runtime_error("CSV missing column '" + name + "'");
}

inline double to_double(const std::string& cell, const std::string& context) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || p != cell.data() + cell.size())
    throw std::runtime_error("bad numeric value '" + cell + "' in " + context);
  return v;
}

}  // namespace ergo::csv
