#pragma once

// Minimal RFC 4180 CSV: comma separated, optional double quotes, "" escapes a quote.

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

namespace contre::csv {

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;
  std::vector<std::size_t> line_numbers;  ///< 1-based source line of each row
};

/// Reads a CSV file whose first row is the header. Every row must have as
/// many fields as the header (ParseError with line number otherwise).
Table read(const std::filesystem::path& path);
Table parse(std::istream& in, const std::string& source_name);

/// Column index of `name`; ParseError if the header lacks it.
std::size_t column(const Table& table, const std::string& name);

void write_row(std::ostream& out, const std::vector<std::string>& fields);

}  // namespace contre::csv
