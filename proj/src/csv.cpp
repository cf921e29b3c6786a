#include "contre/csv.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "contre/error.hpp"

namespace contre::csv {
namespace {

// Splits one logical record starting at the current stream position.
// Returns false at end of input. `line` tracks physical lines consumed.
bool next_record(std::istream& in, std::vector<std::string>& fields, std::size_t& line,
                 const std::string& source) {
  fields.clear();
  std::string raw;
  if (!std::getline(in, raw)) return false;
  ++line;
  const std::size_t start_line = line;
  std::string field;
  bool quoted = false;
  std::size_t i = 0;
  while (true) {
    if (i == raw.size()) {
      if (quoted) {
        std::string more;
        if (!std::getline(in, more)) {
          throw Error(ErrorKind::Parse, source + ": unterminated quoted field", start_line);
        }
        ++line;
        field += '\n';
        raw = std::move(more);
        i = 0;
        continue;
      }
      break;
    }
    const char c = raw[i++];
    if (quoted) {
      if (c == '"') {
        if (i < raw.size() && raw[i] == '"') {
          field += '"';
          ++i;
        } else {
          quoted = false;
        }
      } else {
        field += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(field));
      field.clear();
    } else if (c == '\r' && i == raw.size()) {
      // tolerate CRLF
    } else {
      field += c;
    }
  }
  fields.push_back(std::move(field));
  return true;
}

}  // namespace

Table parse(std::istream& in, const std::string& source_name) {
  Table table;
  std::size_t line = 0;
  std::vector<std::string> fields;
  if (!next_record(in, table.header, line, source_name)) {
    throw Error(ErrorKind::Parse, source_name + ": missing header", 1);
  }
  while (true) {
    const std::size_t before = line + 1;
    if (!next_record(in, fields, line, source_name)) break;
    if (fields.size() == 1 && fields[0].empty()) continue;  // blank line
    if (fields.size() != table.header.size()) {
      throw Error(ErrorKind::Parse,
                  source_name + ": expected " + std::to_string(table.header.size()) + " fields, got " +
                      std::to_string(fields.size()),
                  before);
    }
    table.rows.push_back(fields);
    table.line_numbers.push_back(before);
  }
  return table;
}

Table read(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot open '" + path.string() + "'");
  return parse(in, path.string());
}

std::size_t column(const Table& table, const std::string& name) {
  for (std::size_t i = 0; i < table.header.size(); ++i) {
    if (table.header[i] == name) return i;
  }
  throw Error(ErrorKind::Parse, "missing column '" + name + "'", 1);
}

void write_row(std::ostream& out, const std::vector<std::string>& fields) {
  for (std::size_t i = 0; i < fields.size(); ++i) {
    if (i) out << ',';
    const std::string& f = fields[i];
    if (f.find_first_of(",\"\n\r") == std::string::npos) {
      out << f;
      continue;
    }
    out << '"';
    for (char c : f) {
      if (c == '"') out << '"';
      out << c;
    }
    out << '"';
  }
  out << '\n';
}

}  // namespace contre::csv
