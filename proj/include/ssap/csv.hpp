#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace ssap::csv {

struct Row {
  std::size_t line = 0;  // 1-based source line
  std::vector<std::string> fields;
};

// Reads a comma-separated file whose first non-blank line must equal
// `header` (whitespace around fields ignored). Blank lines are skipped.
// Every data row must have as many fields as the header. Throws ParseError.
std::vector<Row> read(const std::filesystem::path& path, std::string_view header);

double to_double(const Row& row, std::size_t col);
long long to_int(const Row& row, std::size_t col);

// %.17g formatting, so values round-trip.
std::string format_double(double v);

}  // namespace ssap::csv
