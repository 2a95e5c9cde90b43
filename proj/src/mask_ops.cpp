#include "eagle/mask_ops.hpp"

#include <algorithm>
#include <cmath>

#include "eagle/errors.hpp"

namespace eagle {

double box_iou(const BBox& a, const BBox& b) {
  const int ix0 = std::max(a.x_min, b.x_min);
  const int iy0 = std::max(a.y_min, b.y_min);
  const int ix1 = std::min(a.x_max, b.x_max);
  const int iy1 = std::min(a.y_max, b.y_max);
  if (ix1 < ix0 || iy1 < iy0) return 0.0;
  const double inter = static_cast<double>(ix1 - ix0 + 1) * (iy1 - iy0 + 1);
  return inter / (static_cast<double>(a.area()) + static_cast<double>(b.area()) - inter);
}

ScoreMap gaussian_label(double center_row, double center_col, double sigma, int height, int width) {
  if (!(sigma > 0.0)) throw ParameterError("gaussian_label: sigma must be positive");
  ScoreMap out(height, width);
  const double inv = 1.0 / (2.0 * sigma * sigma);
  for (int y = 0; y < height; ++y) {
    const double dy = y - center_row;
    for (int x = 0; x < width; ++x) {
      const double dx = x - center_col;
      out.at(y, x) = std::exp(-(dy * dy + dx * dx) * inv);
    }
  }
  return out;
}

std::vector<std::vector<Pixel>> connected_components(const BinaryMask& mask) {
  std::vector<std::vector<Pixel>> components;
  std::vector<std::uint8_t> seen(mask.data.size(), 0);
  std::vector<Pixel> stack;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x) || seen[mask.index(y, x)]) continue;
      std::vector<Pixel> comp;
      seen[mask.index(y, x)] = 1;
      stack.push_back({y, x});
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comp.push_back(p);
        constexpr int dr[4] = {-1, 1, 0, 0};
        constexpr int dc[4] = {0, 0, -1, 1};
        for (int n = 0; n < 4; ++n) {
          const int ny = p.row + dr[n];
          const int nx = p.col + dc[n];
          if (ny < 0 || nx < 0 || ny >= mask.height || nx >= mask.width) continue;
          const auto idx = mask.index(ny, nx);
          if (mask.data[idx] && !seen[idx]) {
            seen[idx] = 1;
            stack.push_back({ny, nx});
          }
        }
      }
      std::sort(comp.begin(), comp.end());
      components.push_back(std::move(comp));
    }
  }
  return components;
}

BBox min_bounding_rect(std::span<const Pixel> component) {
  if (component.empty()) throw EmptyInputError("min_bounding_rect: empty component");
  BBox box{component[0].col, component[0].row, component[0].col, component[0].row};
  for (const auto& p : component) {
    box.x_min = std::min(box.x_min, p.col);
    box.x_max = std::max(box.x_max, p.col);
    box.y_min = std::min(box.y_min, p.row);
    box.y_max = std::max(box.y_max, p.row);
  }
  return box;
}

std::optional<Centroid> mask_centroid(const BinaryMask& mask) {
  double sr = 0.0, sc = 0.0;
  std::size_t n = 0;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      sr += y;
      sc += x;
      ++n;
    }
  }
  if (n == 0) return std::nullopt;
  return Centroid{sr / static_cast<double>(n), sc / static_cast<double>(n)};
}

}  // namespace eagle
