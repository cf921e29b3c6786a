#pragma once

#include <filesystem>

#include "contre/image.hpp"

namespace contre {

/// Decodes an 8-bit PNG. Palette and low-bit-depth inputs are expanded,
/// 16-bit samples are reduced to 8 bits and alpha channels are dropped.
/// Throws IoError when the file cannot be opened, DecodeError otherwise.
Image read_png(const std::filesystem::path& path);

/// Encodes RGB or grayscale, no ancillary chunks, so equal images give equal bytes.
void write_png(const Image& image, const std::filesystem::path& path);

}  // namespace contre
