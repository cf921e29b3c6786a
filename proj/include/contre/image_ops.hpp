#pragma once

/// @file image_ops.hpp
/// @brief The operator pool of the contrastive sampling strategy.
///
/// Every operator is a pure function of (operator, magnitude, sign, image).
/// Magnitudes live on a 0..30 scale and are mapped linearly onto each
/// operator's parameter range:
///
///     param = min_val + (max_val - min_val) * magnitude / 30   (times sign if signed)
///
/// Operator table (parameter at M=0 -> M=30):
///
///   Identity, AutoContrast, Equalize, Invert   no parameter
///   Rotate        0 -> 30 degrees, signed, counter-clockwise for positive values
///   Posterize     8 -> 4 bits kept (rounded to nearest integer)
///   Solarize      threshold 256 -> 0; p >= threshold becomes 255 - p
///   SolarizeAdd   0 -> 110 added (rounded, saturating) to pixels p < 128
///   Color, Contrast, Brightness, Sharpness
///                 offset 0 -> 0.9, signed; enhancement factor f = 1 + offset,
///                 so the factor spans [0.1, 1.9] around the neutral 1.0
///   ShearX, ShearY          0 -> 0.3, signed
///   TranslateX, TranslateY  0 -> 0.45 of the image width/height, signed
///
/// Enhancement operators blend a degenerate image D with the input I:
///
///     out = clamp(round(D + f * (I - D)), 0, 255)
///
/// where D is
///   Color       the luma image L = (19595 R + 38470 G + 7471 B + 32768) >> 16
///               replicated to all channels (single-channel input: D = I)
///   Contrast    a constant image of value floor(mean(L) + 0.5)
///   Brightness  an all-zero image
///   Sharpness   the 3x3 smoothing kernel [1 1 1; 1 5 1; 1 1 1] / 13, rounded,
///               with the one-pixel border copied from I
///
/// Geometric operators map each output pixel centre back into the source with
/// an affine transform and sample bilinearly; neighbours that fall outside the
/// image contribute the fill value 128 in every channel. Rotation is about the
/// image centre ((w-1)/2, (h-1)/2). The source coordinate of output (x, y) is
///   ShearX      (x + s*y, y)          ShearY      (x, y + s*x)
///   TranslateX  (x + t*w, y)          TranslateY  (x, y + t*h)
///
/// AutoContrast stretches each channel so its [min, max] maps to [0, 255]
/// (lut[i] = clamp(floor(i*255/(max-min) - min*255/(max-min)))), leaving
/// flat channels unchanged. Equalize is the classic cumulative-histogram
/// equalization per channel: step = (N - h[last non-zero bin]) / 255
/// (integer division); lut[i] = (step/2 + sum_{j<i} h[j]) / step; a zero
/// step leaves the channel unchanged.

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "contre/image.hpp"

namespace contre {

struct TransformOp {
  std::string name;
  double min_val = 0.0;  ///< parameter at magnitude 0
  double max_val = 0.0;  ///< parameter at magnitude 30
  bool is_signed = false;

  friend bool operator==(const TransformOp&, const TransformOp&) = default;
};

inline constexpr double kMaxMagnitude = 30.0;
inline constexpr std::uint8_t kFillValue = 128;

/// All operators, in table order.
std::span<const TransformOp> operator_table();

/// Table entry for `name`; throws UnknownOperator.
const TransformOp& find_operator(std::string_view name);

/// Names of every operator in table order.
std::vector<std::string> operator_names();

double magnitude_to_param(const TransformOp& op, double magnitude, int sign = +1);

/// Applies `op` at `magnitude`. `sign` (+1/-1) is ignored for unsigned operators.
Image apply_op(const TransformOp& op, double magnitude, int sign, const Image& image);

/// Applies the operator directly at an already-mapped parameter value.
Image apply_op_param(const TransformOp& op, double param, const Image& image);

namespace ops {

Image invert(const Image& image);
Image posterize(const Image& image, int bits);
Image solarize(const Image& image, double threshold);
Image solarize_add(const Image& image, int addition, int threshold = 128);
Image auto_contrast(const Image& image);
Image equalize(const Image& image);
Image color(const Image& image, double factor);
Image contrast(const Image& image, double factor);
Image brightness(const Image& image, double factor);
Image sharpness(const Image& image, double factor);

/// Inverse-mapped affine warp: src = [a b c; d e f] * [x y 1]^T.
Image affine(const Image& image, double a, double b, double c, double d, double e, double f);
Image rotate(const Image& image, double degrees);

}  // namespace ops

}  // namespace contre
