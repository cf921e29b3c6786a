#pragma once

#include <filesystem>
#include <vector>

#include "contre/augment_policy.hpp"
#include "contre/manifest.hpp"

namespace contre {

inline constexpr const char* kGenerationManifestName = "manifest.csv";

/// Writes `views_per_sample` transformed PNGs per dataset entry into
/// `out_dir` (named `<stem>_v<k>.png`) plus `out_dir/manifest.csv`.
/// Per-view output depends only on (policy, sample_id, view_index, image),
/// never on dataset order or scheduling.
GenerationManifest generate_contrastive_set(const AugmentPolicy& policy, const std::vector<DatasetEntry>& dataset,
                                            int views_per_sample, const std::filesystem::path& out_dir,
                                            unsigned threads = 0);

}  // namespace contre
