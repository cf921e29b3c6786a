#include "contre/shapes.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "contre/png_io.hpp"
#include "contre/rng.hpp"

namespace contre {
namespace {

bool inside(int label, double x, double y, double cx, double cy, double r) {
  const double dx = x - cx;
  const double dy = y - cy;
  switch (label) {
    case 0:
      return dx * dx + dy * dy <= r * r;
    case 1:
      return std::abs(dx) <= r * 0.85 && std::abs(dy) <= r * 0.85;
    default: {
      // apex up, base at cy + r/2
      if (dy < -r || dy > 0.5 * r) return false;
      const double half = (dy + r) / 1.5 * 0.866;
      return std::abs(dx) <= half;
    }
  }
}

}  // namespace

Image render_shape(std::uint64_t seed, std::string_view sample_id, int label, const ShapesOptions& options) {
  if (label < 0 || label >= kShapeClassCount) throw Error(ErrorKind::InvalidArgument, "shape label out of range");
  Engine eng(Fnv1a64().u64(seed).text(sample_id).digest());
  const int s = options.size;
  const double r = uniform_real(eng, 0.18, 0.32) * s;
  const double cx = uniform_real(eng, r, s - 1 - r);
  const double cy = uniform_real(eng, r, s - 1 - r);
  std::array<double, 3> bg{}, fg{};
  for (auto& v : bg) v = uniform_real(eng, 0, 110);
  for (auto& v : fg) v = uniform_real(eng, 140, 255);

  Image img(s, s, 3);
  for (int y = 0; y < s; ++y) {
    for (int x = 0; x < s; ++x) {
      const bool on = inside(label, x, y, cx, cy, r);
      for (int c = 0; c < 3; ++c) {
        const double v = (on ? fg[c] : bg[c]) + uniform_real(eng, -options.noise, options.noise);
        img.at(x, y, c) = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
      }
    }
  }
  return img;
}

LabeledImages make_shapes(int count, std::uint64_t seed, const std::string& prefix, const ShapesOptions& options) {
  LabeledImages out;
  const int digits = std::max(1, static_cast<int>(std::to_string(std::max(count - 1, 0)).size()));
  for (int i = 0; i < count; ++i) {
    std::string index = std::to_string(i);
    std::string id = prefix + std::string(digits - index.size(), '0') + index;
    const int label = i % kShapeClassCount;
    out.images.push_back(render_shape(seed, id, label, options));
    out.labels.push_back(label);
    out.ids.push_back(std::move(id));
  }
  return out;
}

std::vector<DatasetEntry> write_shapes_dataset(const LabeledImages& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::vector<DatasetEntry> entries;
  for (std::size_t i = 0; i < data.images.size(); ++i) {
    const auto path = dir / (file_stem_for(data.ids[i]) + ".png");
    write_png(data.images[i], path);
    entries.push_back({data.ids[i], path, data.labels[i]});
  }
  write_dataset_manifest(entries, dir / "manifest.csv");
  return entries;
}

}  // namespace contre
