#include "contre/manifest.hpp"

#include <charconv>
#include <fstream>
#include <set>

#include "contre/csv.hpp"

namespace contre {
namespace {

template <typename T>
T parse_integer(const std::string& text, const std::string& what, std::size_t line) {
  T value{};
  const auto* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc{} || ptr != end || text.empty()) {
    throw Error(ErrorKind::Parse, "invalid " + what + " '" + text + "'", line);
  }
  return value;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorKind::Io, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

std::vector<DatasetEntry> read_dataset_manifest(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_id = csv::column(table, "sample_id");
  const auto c_path = csv::column(table, "path");
  const auto c_label = csv::column(table, "label");
  const auto base = path.parent_path();

  std::vector<DatasetEntry> entries;
  std::set<std::string> seen;
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    if (row[c_id].empty()) throw Error(ErrorKind::Parse, "empty sample_id", line);
    if (!seen.insert(row[c_id]).second) {
      throw Error(ErrorKind::DuplicateRecord, "duplicate sample_id '" + row[c_id] + "'", line);
    }
    const int label = parse_integer<int>(row[c_label], "label", line);
    if (label < 0) throw Error(ErrorKind::Parse, "negative label", line);
    std::filesystem::path p = row[c_path];
    if (p.is_relative()) p = base / p;
    entries.push_back({row[c_id], p.lexically_normal(), label});
  }
  return entries;
}

void write_dataset_manifest(const std::vector<DatasetEntry>& entries, const std::filesystem::path& path) {
  auto out = open_out(path);
  const auto base = path.parent_path();
  csv::write_row(out, {"sample_id", "path", "label"});
  for (const auto& e : entries) {
    auto rel = e.path.lexically_relative(base.empty() ? "." : base);
    if (rel.empty() || *rel.begin() == "..") rel = e.path;
    csv::write_row(out, {e.sample_id, rel.generic_string(), std::to_string(e.label)});
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

void write_generation_manifest(const GenerationManifest& manifest, const std::filesystem::path& path) {
  auto out = open_out(path);
  csv::write_row(out, {"sample_id", "view_index", "path", "label", "ops", "seed"});
  for (const auto& row : manifest.rows) {
    csv::write_row(out, {row.sample_id, std::to_string(row.view_index), row.path.generic_string(),
                         std::to_string(row.label), format_ops(row.ops), std::to_string(row.seed)});
  }
  if (!out) throw Error(ErrorKind::Io, "failed writing '" + path.string() + "'");
}

GenerationManifest read_generation_manifest(const std::filesystem::path& path) {
  const auto table = csv::read(path);
  const auto c_id = csv::column(table, "sample_id");
  const auto c_view = csv::column(table, "view_index");
  const auto c_path = csv::column(table, "path");
  const auto c_label = csv::column(table, "label");
  const auto c_ops = csv::column(table, "ops");
  const auto c_seed = csv::column(table, "seed");

  GenerationManifest manifest;
  manifest.directory = path.parent_path();
  for (std::size_t r = 0; r < table.rows.size(); ++r) {
    const auto& row = table.rows[r];
    const auto line = table.line_numbers[r];
    GeneratedView v;
    v.sample_id = row[c_id];
    v.view_index = parse_integer<std::uint64_t>(row[c_view], "view_index", line);
    v.path = row[c_path];
    v.label = parse_integer<int>(row[c_label], "label", line);
    try {
      v.ops = parse_ops(row[c_ops]);
    } catch (const Error& e) {
      throw Error(ErrorKind::Parse, e.what(), line);
    }
    v.seed = parse_integer<std::uint64_t>(row[c_seed], "seed", line);
    manifest.rows.push_back(std::move(v));
  }
  return manifest;
}

std::string file_stem_for(std::string_view sample_id) {
  std::string stem(sample_id);
  for (auto& c : stem) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) c = '_';
  }
  return stem;
}

}  // namespace contre
