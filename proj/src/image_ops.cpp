#include "contre/image_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <numbers>

namespace contre {
namespace {

const std::array<TransformOp, 16> kTable = {{
    {"Identity", 0.0, 0.0, false},
    {"AutoContrast", 0.0, 0.0, false},
    {"Equalize", 0.0, 0.0, false},
    {"Invert", 0.0, 0.0, false},
    {"Rotate", 0.0, 30.0, true},
    {"Posterize", 8.0, 4.0, false},
    {"Solarize", 256.0, 0.0, false},
    {"SolarizeAdd", 0.0, 110.0, false},
    {"Color", 0.0, 0.9, true},
    {"Contrast", 0.0, 0.9, true},
    {"Brightness", 0.0, 0.9, true},
    {"Sharpness", 0.0, 0.9, true},
    {"ShearX", 0.0, 0.3, true},
    {"ShearY", 0.0, 0.3, true},
    {"TranslateX", 0.0, 0.45, true},
    {"TranslateY", 0.0, 0.45, true},
}};

std::uint8_t saturate(double v) {
  if (!(v > 0.0)) return 0;
  if (v >= 255.0) return 255;
  return static_cast<std::uint8_t>(std::lround(v));
}

std::uint8_t saturate(long v) { return static_cast<std::uint8_t>(std::clamp(v, 0L, 255L)); }

template <typename F>
Image map_pixels(const Image& image, F&& f) {
  Image out = image;
  for (auto& p : out.pixels()) p = f(p);
  return out;
}

Image apply_lut_per_channel(const Image& image, const std::vector<std::array<std::uint8_t, 256>>& luts) {
  Image out = image;
  auto px = out.pixels();
  const auto channels = static_cast<std::size_t>(image.channels());
  for (std::size_t i = 0; i < px.size(); ++i) px[i] = luts[i % channels][px[i]];
  return out;
}

std::vector<std::array<std::uint32_t, 256>> histograms(const Image& image) {
  std::vector<std::array<std::uint32_t, 256>> h(image.channels());
  for (auto& a : h) a.fill(0);
  auto px = image.pixels();
  const auto channels = static_cast<std::size_t>(image.channels());
  for (std::size_t i = 0; i < px.size(); ++i) ++h[i % channels][px[i]];
  return h;
}

std::array<std::uint8_t, 256> identity_lut() {
  std::array<std::uint8_t, 256> lut{};
  for (int i = 0; i < 256; ++i) lut[i] = static_cast<std::uint8_t>(i);
  return lut;
}

std::uint8_t luma(std::uint8_t r, std::uint8_t g, std::uint8_t b) {
  return static_cast<std::uint8_t>((19595u * r + 38470u * g + 7471u * b + 0x8000u) >> 16);
}

Image grayscale_replicated(const Image& image) {
  if (image.channels() == 1) return image;
  Image out = image;
  auto px = out.pixels();
  for (std::size_t i = 0; i < px.size(); i += 3) {
    const auto l = luma(px[i], px[i + 1], px[i + 2]);
    px[i] = px[i + 1] = px[i + 2] = l;
  }
  return out;
}

Image blend(const Image& degenerate, const Image& image, double factor) {
  Image out = image;
  auto o = out.pixels();
  auto d = degenerate.pixels();
  auto s = image.pixels();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double dv = d[i];
    o[i] = saturate(dv + factor * (static_cast<double>(s[i]) - dv));
  }
  return out;
}

bool is_neutral_enhancement(double factor) { return factor == 1.0; }

}  // namespace

std::span<const TransformOp> operator_table() { return kTable; }

const TransformOp& find_operator(std::string_view name) {
  for (const auto& op : kTable) {
    if (op.name == name) return op;
  }
  throw Error(ErrorKind::UnknownOperator, "'" + std::string(name) + "'");
}

std::vector<std::string> operator_names() {
  std::vector<std::string> names;
  names.reserve(kTable.size());
  for (const auto& op : kTable) names.push_back(op.name);
  return names;
}

double magnitude_to_param(const TransformOp& op, double magnitude, int sign) {
  if (!(magnitude >= 0.0 && magnitude <= kMaxMagnitude)) {
    throw Error(ErrorKind::InvalidMagnitude, "magnitude " + std::to_string(magnitude) + " outside [0, 30]");
  }
  const double value = op.min_val + (op.max_val - op.min_val) * (magnitude / kMaxMagnitude);
  return (op.is_signed && sign < 0) ? -value : value;
}

namespace ops {

Image invert(const Image& image) {
  return map_pixels(image, [](std::uint8_t p) { return static_cast<std::uint8_t>(255 - p); });
}

Image posterize(const Image& image, int bits) {
  bits = std::clamp(bits, 0, 8);
  const auto mask = static_cast<std::uint8_t>(~((1u << (8 - bits)) - 1u) & 0xFFu);
  return map_pixels(image, [mask](std::uint8_t p) { return static_cast<std::uint8_t>(p & mask); });
}

Image solarize(const Image& image, double threshold) {
  return map_pixels(image, [threshold](std::uint8_t p) {
    return p >= threshold ? static_cast<std::uint8_t>(255 - p) : p;
  });
}

Image solarize_add(const Image& image, int addition, int threshold) {
  return map_pixels(image, [=](std::uint8_t p) {
    return p < threshold ? saturate(static_cast<long>(p) + addition) : p;
  });
}

Image auto_contrast(const Image& image) {
  const auto hist = histograms(image);
  std::vector<std::array<std::uint8_t, 256>> luts;
  for (const auto& h : hist) {
    int lo = 0;
    while (lo < 256 && h[lo] == 0) ++lo;
    int hi = 255;
    while (hi >= 0 && h[hi] == 0) --hi;
    if (hi <= lo) {
      luts.push_back(identity_lut());
      continue;
    }
    const double scale = 255.0 / (hi - lo);
    const double offset = -lo * scale;
    std::array<std::uint8_t, 256> lut{};
    for (int i = 0; i < 256; ++i) {
      lut[i] = saturate(static_cast<long>(std::trunc(i * scale + offset)));
    }
    luts.push_back(lut);
  }
  return apply_lut_per_channel(image, luts);
}

Image equalize(const Image& image) {
  const auto hist = histograms(image);
  std::vector<std::array<std::uint8_t, 256>> luts;
  for (const auto& h : hist) {
    std::uint64_t total = 0;
    std::uint64_t last = 0;
    int nonzero = 0;
    for (auto c : h) {
      if (c == 0) continue;
      total += c;
      last = c;
      ++nonzero;
    }
    const std::uint64_t step = nonzero <= 1 ? 0 : (total - last) / 255;
    if (step == 0) {
      luts.push_back(identity_lut());
      continue;
    }
    std::array<std::uint8_t, 256> lut{};
    std::uint64_t n = step / 2;
    for (int i = 0; i < 256; ++i) {
      lut[i] = static_cast<std::uint8_t>(std::min<std::uint64_t>(n / step, 255));
      n += h[i];
    }
    luts.push_back(lut);
  }
  return apply_lut_per_channel(image, luts);
}

Image color(const Image& image, double factor) {
  if (is_neutral_enhancement(factor)) return image;
  return blend(grayscale_replicated(image), image, factor);
}

Image contrast(const Image& image, double factor) {
  if (is_neutral_enhancement(factor)) return image;
  const Image gray = grayscale_replicated(image);
  double sum = 0.0;
  const auto px = gray.pixels();
  for (std::size_t i = 0; i < px.size(); i += image.channels()) sum += px[i];
  const double mean = sum / (static_cast<double>(image.width()) * image.height());
  const auto level = static_cast<std::uint8_t>(std::floor(mean + 0.5));
  Image degenerate = image;
  std::fill(degenerate.pixels().begin(), degenerate.pixels().end(), level);
  return blend(degenerate, image, factor);
}

Image brightness(const Image& image, double factor) {
  if (is_neutral_enhancement(factor)) return image;
  Image degenerate(image.width(), image.height(), image.channels());
  return blend(degenerate, image, factor);
}

Image sharpness(const Image& image, double factor) {
  if (is_neutral_enhancement(factor)) return image;
  Image degenerate = image;
  const int w = image.width();
  const int h = image.height();
  for (int y = 1; y + 1 < h; ++y) {
    for (int x = 1; x + 1 < w; ++x) {
      for (int c = 0; c < image.channels(); ++c) {
        int sum = 4 * image.at(x, y, c);
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) sum += image.at(x + dx, y + dy, c);
        }
        degenerate.at(x, y, c) = static_cast<std::uint8_t>((sum + 6) / 13);
      }
    }
  }
  return blend(degenerate, image, factor);
}

Image affine(const Image& image, double a, double b, double c, double d, double e, double f) {
  const int w = image.width();
  const int h = image.height();
  const int channels = image.channels();
  Image out(w, h, channels);
  auto sample = [&](int x, int y, int ch) -> double {
    if (x < 0 || y < 0 || x >= w || y >= h) return kFillValue;
    return image.at(x, y, ch);
  };
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const double xs = a * x + b * y + c;
      const double ys = d * x + e * y + f;
      const double xf = std::floor(xs);
      const double yf = std::floor(ys);
      const double fx = xs - xf;
      const double fy = ys - yf;
      // Far outside: avoid int overflow on the cast.
      if (xf < -2.0 || yf < -2.0 || xf > w + 1.0 || yf > h + 1.0) {
        for (int ch = 0; ch < channels; ++ch) out.at(x, y, ch) = kFillValue;
        continue;
      }
      const int x0 = static_cast<int>(xf);
      const int y0 = static_cast<int>(yf);
      for (int ch = 0; ch < channels; ++ch) {
        const double v = (1.0 - fx) * (1.0 - fy) * sample(x0, y0, ch) +
                         fx * (1.0 - fy) * sample(x0 + 1, y0, ch) +
                         (1.0 - fx) * fy * sample(x0, y0 + 1, ch) + fx * fy * sample(x0 + 1, y0 + 1, ch);
        out.at(x, y, ch) = saturate(v);
      }
    }
  }
  return out;
}

Image rotate(const Image& image, double degrees) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta);
  const double sn = std::sin(theta);
  const double cx = (image.width() - 1) / 2.0;
  const double cy = (image.height() - 1) / 2.0;
  return affine(image, cs, -sn, cx - cs * cx + sn * cy, sn, cs, cy - sn * cx - cs * cy);
}

}  // namespace ops

Image apply_op_param(const TransformOp& op, double param, const Image& image) {
  const std::string& n = op.name;
  if (n == "Identity") return image;
  if (n == "AutoContrast") return ops::auto_contrast(image);
  if (n == "Equalize") return ops::equalize(image);
  if (n == "Invert") return ops::invert(image);
  if (n == "Rotate") return ops::rotate(image, param);
  if (n == "Posterize") return ops::posterize(image, static_cast<int>(std::lround(param)));
  if (n == "Solarize") return ops::solarize(image, param);
  if (n == "SolarizeAdd") return ops::solarize_add(image, static_cast<int>(std::lround(param)));
  if (n == "Color") return ops::color(image, 1.0 + param);
  if (n == "Contrast") return ops::contrast(image, 1.0 + param);
  if (n == "Brightness") return ops::brightness(image, 1.0 + param);
  if (n == "Sharpness") return ops::sharpness(image, 1.0 + param);
  if (n == "ShearX") return ops::affine(image, 1.0, param, 0.0, 0.0, 1.0, 0.0);
  if (n == "ShearY") return ops::affine(image, 1.0, 0.0, 0.0, param, 1.0, 0.0);
  if (n == "TranslateX") return ops::affine(image, 1.0, 0.0, param * image.width(), 0.0, 1.0, 0.0);
  if (n == "TranslateY") return ops::affine(image, 1.0, 0.0, 0.0, 0.0, 1.0, param * image.height());
  throw Error(ErrorKind::UnknownOperator, "'" + n + "'");
}

Image apply_op(const TransformOp& op, double magnitude, int sign, const Image& image) {
  // Validate the name before the magnitude so an unknown operator is reported as such.
  (void)find_operator(op.name);
  return apply_op_param(op, magnitude_to_param(op, magnitude, sign), image);
}

}  // namespace contre
