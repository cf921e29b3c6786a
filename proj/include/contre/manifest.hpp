#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "contre/augment_policy.hpp"

namespace contre {

/// One row of an input manifest (`sample_id,path,label`). `path` is resolved
/// against the manifest's directory when read.
struct DatasetEntry {
  std::string sample_id;
  std::filesystem::path path;
  int label = 0;
  friend bool operator==(const DatasetEntry&, const DatasetEntry&) = default;
};

std::vector<DatasetEntry> read_dataset_manifest(const std::filesystem::path& path);

/// Paths are written relative to the manifest directory when possible.
void write_dataset_manifest(const std::vector<DatasetEntry>& entries, const std::filesystem::path& path);

/// One row of a generation manifest (`sample_id,view_index,path,label,ops,seed`).
struct GeneratedView {
  std::string sample_id;
  std::uint64_t view_index = 0;
  std::filesystem::path path;  ///< relative to the manifest directory
  int label = 0;
  std::vector<ChosenOp> ops;
  std::uint64_t seed = 0;
  friend bool operator==(const GeneratedView&, const GeneratedView&) = default;
};

struct GenerationManifest {
  std::filesystem::path directory;
  std::vector<GeneratedView> rows;  ///< sorted by (sample_id, view_index)
};

void write_generation_manifest(const GenerationManifest& manifest, const std::filesystem::path& path);
GenerationManifest read_generation_manifest(const std::filesystem::path& path);

/// File-name-safe stem for a sample id ([A-Za-z0-9._-], everything else '_').
std::string file_stem_for(std::string_view sample_id);

}  // namespace contre
