#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "contre/error.hpp"

namespace contre {

/// Row-major interleaved 8-bit raster (RGB or grayscale).
class Image {
 public:
  Image() = default;

  /// Zero-filled image.
  Image(int width, int height, int channels)
      : Image(width, height, channels,
              std::vector<std::uint8_t>(checked_size(width, height, channels), 0)) {}

  Image(int width, int height, int channels, std::vector<std::uint8_t> pixels)
      : width_(width), height_(height), channels_(channels), pixels_(std::move(pixels)) {
    if (pixels_.size() != checked_size(width, height, channels)) {
      throw Error(ErrorKind::ShapeMismatch, "pixel buffer length does not equal width*height*channels");
    }
  }

  int width() const noexcept { return width_; }
  int height() const noexcept { return height_; }
  int channels() const noexcept { return channels_; }
  bool empty() const noexcept { return pixels_.empty(); }

  std::span<const std::uint8_t> pixels() const noexcept { return pixels_; }
  std::span<std::uint8_t> pixels() noexcept { return pixels_; }

  std::uint8_t at(int x, int y, int c) const noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  std::uint8_t& at(int x, int y, int c) noexcept {
    return pixels_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }

  bool same_shape(const Image& other) const noexcept {
    return width_ == other.width_ && height_ == other.height_ && channels_ == other.channels_;
  }

  friend bool operator==(const Image&, const Image&) = default;

 private:
  static std::size_t checked_size(int width, int height, int channels) {
    if (width < 1 || height < 1 || (channels != 1 && channels != 3)) {
      throw Error(ErrorKind::ShapeMismatch, "image must be at least 1x1 with 1 or 3 channels");
    }
    return static_cast<std::size_t>(width) * height * channels;
  }

  int width_ = 0;
  int height_ = 0;
  int channels_ = 0;
  std::vector<std::uint8_t> pixels_;
};

}  // namespace contre
