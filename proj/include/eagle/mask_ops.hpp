#pragma once

#include <compare>
#include <optional>
#include <span>
#include <vector>

#include "eagle/tensor.hpp"

namespace eagle {

struct Pixel {
  int row = 0;
  int col = 0;
  auto operator<=>(const Pixel&) const = default;
};

/// Inclusive pixel rectangle; x is the column axis, y the row axis.
struct BBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  int width() const { return x_max - x_min + 1; }
  int height() const { return y_max - y_min + 1; }
  long long area() const { return static_cast<long long>(width()) * height(); }
  bool operator==(const BBox&) const = default;
};

/// Intersection over union of two inclusive pixel rectangles.
double box_iou(const BBox& a, const BBox& b);

/// exp(-||p - center||^2 / (2 sigma^2)) evaluated at every pixel center.
ScoreMap gaussian_label(double center_row, double center_col, double sigma, int height, int width);

/// 4-connected components, ordered by their first pixel in row-major order.
/// Pixels within a component are sorted row-major.
std::vector<std::vector<Pixel>> connected_components(const BinaryMask& mask);

/// Throws EmptyInputError on an empty component.
BBox min_bounding_rect(std::span<const Pixel> component);

/// Mean pixel coordinate of the foreground, or nullopt for an empty mask.
struct Centroid {
  double row = 0.0;
  double col = 0.0;
};
std::optional<Centroid> mask_centroid(const BinaryMask& mask);

}  // namespace eagle
