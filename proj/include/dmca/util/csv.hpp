#ifndef DMCA_UTIL_CSV_HPP
#define DMCA_UTIL_CSV_HPP

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "dmca/util/errors.hpp"

namespace dmca {

// Shortest decimal form that round-trips a double exactly.
inline std::string format_double(double v) {
  char buf[40];
  auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  (void)ec;
  return std::string(buf, p);
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

// Reads a CSV file, separating leading '#' comment lines from data lines.
struct CsvFile {
  std::vector<std::string> comments;  // without the leading '#'
  std::vector<std::string> header;    // first non-comment line, split
  std::vector<std::vector<std::string>> rows;
};

inline CsvFile read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open file: " + path);
  CsvFile f;
  std::string line;
  bool have_header = false;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (line[0] == '#') {
      std::string c = line.substr(1);
      while (!c.empty() && c.front() == ' ') c.erase(c.begin());
      f.comments.push_back(c);
      continue;
    }
    if (!have_header) {
      f.header = split_csv_line(line);
      have_header = true;
    } else {
      f.rows.push_back(split_csv_line(line));
    }
  }
  return f;
}

inline double parse_double(const std::string& s,
                           const std::string& context = "numeric field") {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && (s[pos] == ' ' || s[pos] == '\t')) ++pos;
    if (pos != s.size()) throw DataError("");
    return v;
  } catch (const std::exception&) {
    throw DataError("bad numeric value '" + s + "' in " + context);
  }
}

}  // namespace dmca

#endif
