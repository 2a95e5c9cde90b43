#pragma once

#include <array>

#include "eagle/mask_ops.hpp"
#include "eagle/tensor.hpp"

namespace eagle {

// Crop windows live in continuous "edge" coordinates: pixel (r, c) covers
// [c, c + 1) x [r, r + 1). A window is the axis-aligned square
// [x0, x0 + side) x [y0, y0 + side).

struct CropWindow {
  double x0 = 0.0;
  double y0 = 0.0;
  double side = 1.0;
  double scale = 1.0;  // side-length multiplier relative to the object box
  double padded_fraction = 0.0;
};

/// Side-length multipliers tried in order; their areas are 2.25, 1.44 and 1.0.
inline constexpr std::array<double, 3> kCropLadder = {1.5, 1.2, 1.0};
inline constexpr double kMaxPaddedFraction = 0.5;

/// Fraction of the window area that falls outside a height x width image.
double padded_fraction(double x0, double y0, double side, int height, int width);

/// Square window of the given side centered at (cx, cy) in edge coordinates.
CropWindow centered_window(double cx, double cy, double side, int height, int width);

/// Window centered on the mask centroid with side = scale * max(bbox side),
/// walking down kCropLadder while the padded fraction exceeds one half.
/// Throws EmptyInputError for an empty mask.
CropWindow mask_crop_window(const BinaryMask& mask);

/// Bilinear resampling of the window onto a res x res grid; outside samples read zero.
FeatureMap resample_bilinear(const FeatureMap& src, const CropWindow& win, int res);
ScoreMap resample_bilinear(const ScoreMap& src, const CropWindow& win, int res);

/// Nearest-pixel resampling for masks.
BinaryMask resample_nearest(const BinaryMask& src, const CropWindow& win, int res);

}  // namespace eagle
