#pragma once

/// @file shapes.hpp
/// @brief Seeded synthetic classification task: disks, squares and triangles
/// on a noisy background, with random position, size and colours.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "contre/image.hpp"
#include "contre/manifest.hpp"

namespace contre {

struct ShapesOptions {
  int size = 32;
  double noise = 16.0;  ///< half-width of the uniform per-pixel noise
};

inline constexpr int kShapeClassCount = 3;

struct LabeledImages {
  std::vector<std::string> ids;
  std::vector<Image> images;
  std::vector<int> labels;
};

/// One sample; a pure function of (seed, sample_id, label).
Image render_shape(std::uint64_t seed, std::string_view sample_id, int label, const ShapesOptions& options = {});

/// `count` samples with ids `<prefix><index>` and labels cycling 0, 1, 2.
LabeledImages make_shapes(int count, std::uint64_t seed, const std::string& prefix, const ShapesOptions& options = {});

/// Writes `<dir>/<id>.png` plus `<dir>/manifest.csv`; returns the entries.
std::vector<DatasetEntry> write_shapes_dataset(const LabeledImages& data, const std::filesystem::path& dir);

}  // namespace contre
