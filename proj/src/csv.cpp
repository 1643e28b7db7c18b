#include "ssap/csv.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "ssap/errors.hpp"

namespace ssap::csv {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::vector<Row> read(const std::filesystem::path& path, std::string_view header) {
  std::ifstream in(path);
  if (!in) throw ParseError(0, "cannot open " + path.string());

  const auto expected = split(header);
  std::vector<Row> rows;
  bool seen_header = false;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split(line);
    if (!seen_header) {
      if (fields != expected) {
        throw ParseError(line_no, path.string() + ": expected header '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    if (fields.size() != expected.size()) {
      throw ParseError(line_no, path.string() + ": expected " + std::to_string(expected.size()) +
                                    " fields, got " + std::to_string(fields.size()));
    }
    rows.push_back({line_no, std::move(fields)});
  }
  if (!seen_header) throw ParseError(0, path.string() + ": empty file");
  return rows;
}

double to_double(const Row& row, std::size_t col) {
  const std::string& s = row.fields.at(col);
  char* end = nullptr;
  errno = 0;
  const double v = std::strtod(s.c_str(), &end);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError(row.line, "not a number: '" + s + "'");
  }
  return v;
}

long long to_int(const Row& row, std::size_t col) {
  const std::string& s = row.fields.at(col);
  char* end = nullptr;
  errno = 0;
  const long long v = std::strtoll(s.c_str(), &end, 10);
  if (s.empty() || end != s.c_str() + s.size() || errno == ERANGE) {
    throw ParseError(row.line, "not an integer: '" + s + "'");
  }
  return v;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

}  // namespace ssap::csv
