#include "eagle/crop.hpp"

#include <algorithm>
#include <cmath>

#include "eagle/errors.hpp"

namespace eagle {

namespace {

double overlap_1d(double a0, double a1, double b0, double b1) {
  return std::max(0.0, std::min(a1, b1) - std::max(a0, b0));
}

void check_res(int res) {
  if (res <= 0) throw ParameterError("crop resolution must be positive");
}

// Bilinear weights for sample position s (pixel-center coordinates) along an
// axis of length n. Out-of-range taps get index -1.
struct Taps {
  int i0, i1;
  double w0, w1;
};

Taps taps(double s, int n) {
  const double f = std::floor(s);
  const int i = static_cast<int>(f);
  const double t = s - f;
  Taps out{i, i + 1, 1.0 - t, t};
  if (out.i0 < 0 || out.i0 >= n) out.i0 = -1;
  if (out.i1 < 0 || out.i1 >= n) out.i1 = -1;
  return out;
}

}  // namespace

double padded_fraction(double x0, double y0, double side, int height, int width) {
  if (!(side > 0.0)) throw ParameterError("crop side must be positive");
  const double inside = overlap_1d(x0, x0 + side, 0.0, width) * overlap_1d(y0, y0 + side, 0.0, height);
  return 1.0 - inside / (side * side);
}

CropWindow centered_window(double cx, double cy, double side, int height, int width) {
  CropWindow w;
  w.side = side;
  w.x0 = cx - side / 2.0;
  w.y0 = cy - side / 2.0;
  w.padded_fraction = padded_fraction(w.x0, w.y0, side, height, width);
  return w;
}

CropWindow mask_crop_window(const BinaryMask& mask) {
  const auto centroid = mask_centroid(mask);
  if (!centroid) throw EmptyInputError("crop: mask is empty");
  int x_min = mask.width, x_max = -1, y_min = mask.height, y_max = -1;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      x_min = std::min(x_min, x);
      x_max = std::max(x_max, x);
      y_min = std::min(y_min, y);
      y_max = std::max(y_max, y);
    }
  }
  const double box_side = std::max(x_max - x_min + 1, y_max - y_min + 1);
  const double cx = centroid->col + 0.5;
  const double cy = centroid->row + 0.5;
  CropWindow w;
  for (double scale : kCropLadder) {
    w = centered_window(cx, cy, scale * box_side, mask.height, mask.width);
    w.scale = scale;
    if (w.padded_fraction <= kMaxPaddedFraction) break;
  }
  return w;
}

FeatureMap resample_bilinear(const FeatureMap& src, const CropWindow& win, int res) {
  check_res(res);
  FeatureMap out(res, res, src.channels);
  const double step = win.side / res;
  for (int i = 0; i < res; ++i) {
    const Taps ty = taps(win.y0 + (i + 0.5) * step - 0.5, src.height);
    for (int j = 0; j < res; ++j) {
      const Taps tx = taps(win.x0 + (j + 0.5) * step - 0.5, src.width);
      double* o = &out.data[out.index(i, j, 0)];
      const int ys[2] = {ty.i0, ty.i1};
      const double wy[2] = {ty.w0, ty.w1};
      const int xs[2] = {tx.i0, tx.i1};
      const double wx[2] = {tx.w0, tx.w1};
      for (int a = 0; a < 2; ++a) {
        if (ys[a] < 0 || wy[a] == 0.0) continue;
        for (int b = 0; b < 2; ++b) {
          if (xs[b] < 0 || wx[b] == 0.0) continue;
          const double w = wy[a] * wx[b];
          const double* s = &src.data[src.index(ys[a], xs[b], 0)];
          for (int c = 0; c < src.channels; ++c) o[c] += w * s[c];
        }
      }
    }
  }
  return out;
}

ScoreMap resample_bilinear(const ScoreMap& src, const CropWindow& win, int res) {
  FeatureMap as_map(src.height, src.width, 1, src.data);
  FeatureMap r = resample_bilinear(as_map, win, res);
  return ScoreMap(res, res, std::move(r.data));
}

BinaryMask resample_nearest(const BinaryMask& src, const CropWindow& win, int res) {
  check_res(res);
  BinaryMask out(res, res);
  const double step = win.side / res;
  for (int i = 0; i < res; ++i) {
    const int y = static_cast<int>(std::floor(win.y0 + (i + 0.5) * step));
    if (y < 0 || y >= src.height) continue;
    for (int j = 0; j < res; ++j) {
      const int x = static_cast<int>(std::floor(win.x0 + (j + 0.5) * step));
      if (x < 0 || x >= src.width) continue;
      out.set(i, j, src.at(y, x));
    }
  }
  return out;
}

}  // namespace eagle
