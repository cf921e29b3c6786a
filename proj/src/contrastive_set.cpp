#include "contre/contrastive_set.hpp"

#include <algorithm>
#include <set>

#include "contre/parallel.hpp"
#include "contre/png_io.hpp"

namespace contre {

GenerationManifest generate_contrastive_set(const AugmentPolicy& policy, const std::vector<DatasetEntry>& dataset,
                                            int views_per_sample, const std::filesystem::path& out_dir,
                                            unsigned threads) {
  policy.validate();
  if (views_per_sample < 1) throw Error(ErrorKind::InvalidArgument, "views_per_sample must be >= 1");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorKind::Io, "cannot create '" + out_dir.string() + "': " + ec.message());

  std::vector<const DatasetEntry*> sorted;
  sorted.reserve(dataset.size());
  for (const auto& e : dataset) sorted.push_back(&e);
  std::sort(sorted.begin(), sorted.end(),
            [](const DatasetEntry* a, const DatasetEntry* b) { return a->sample_id < b->sample_id; });

  std::set<std::string> stems;
  for (const auto* e : sorted) {
    if (!stems.insert(file_stem_for(e->sample_id)).second) {
      throw Error(ErrorKind::InvalidArgument, "sample ids collide after sanitising: '" + e->sample_id + "'");
    }
  }

  const auto views = static_cast<std::size_t>(views_per_sample);
  GenerationManifest manifest;
  manifest.directory = out_dir;
  manifest.rows.resize(sorted.size() * views);

  parallel_for(
      sorted.size(),
      [&](std::size_t i) {
        const DatasetEntry& entry = *sorted[i];
        const Image original = read_png(entry.path);
        for (std::size_t k = 1; k <= views; ++k) {
          const ViewDescriptor view = sample_view(policy, entry.sample_id, k);
          const std::filesystem::path file = file_stem_for(entry.sample_id) + "_v" + std::to_string(k) + ".png";
          write_png(render_view(policy, view, original), out_dir / file);
          manifest.rows[i * views + (k - 1)] = {entry.sample_id, k, file, entry.label, view.chosen_ops,
                                                 view.derived_seed};
        }
      },
      threads);

  write_generation_manifest(manifest, out_dir / kGenerationManifestName);
  return manifest;
}

}  // namespace contre
