#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eagle {

/// Dense H x W x C tensor stored row-major in (h, w, c) order.
struct FeatureMap {
  int height = 0;
  int width = 0;
  int channels = 0;
  std::vector<double> data;

  FeatureMap() = default;
  FeatureMap(int h, int w, int c, double fill = 0.0);
  /// Throws DimensionError if the value count does not match h * w * c.
  FeatureMap(int h, int w, int c, std::vector<double> values);

  std::size_t index(int y, int x, int c) const {
    return (static_cast<std::size_t>(y) * width + x) * channels + c;
  }
  double& at(int y, int x, int c) { return data[index(y, x, c)]; }
  double at(int y, int x, int c) const { return data[index(y, x, c)]; }

  bool same_shape(const FeatureMap& o) const {
    return height == o.height && width == o.width && channels == o.channels;
  }
  bool all_finite() const;
};

/// Single-channel real map (score maps, probabilities, weights, depth).
struct ScoreMap {
  int height = 0;
  int width = 0;
  std::vector<double> data;

  ScoreMap() = default;
  ScoreMap(int h, int w, double fill = 0.0);
  ScoreMap(int h, int w, std::vector<double> values);

  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
  double& at(int y, int x) { return data[index(y, x)]; }
  double at(int y, int x) const { return data[index(y, x)]; }

  bool same_dims(int h, int w) const { return height == h && width == w; }
  double max_value() const;
};

struct BinaryMask {
  int height = 0;
  int width = 0;
  std::vector<std::uint8_t> data;

  BinaryMask() = default;
  BinaryMask(int h, int w);
  /// Throws ParameterError on any value other than 0 or 1.
  BinaryMask(int h, int w, std::vector<std::uint8_t> values);

  std::size_t index(int y, int x) const { return static_cast<std::size_t>(y) * width + x; }
  bool at(int y, int x) const { return data[index(y, x)] != 0; }
  void set(int y, int x, bool on) { data[index(y, x)] = on ? 1 : 0; }

  bool same_dims(int h, int w) const { return height == h && width == w; }
  std::size_t count() const;
  bool empty() const { return count() == 0; }
};

struct KernelShape {
  int k = 1;
  int in_channels = 1;
  int out_channels = 1;
};

/// Convolution weights in (ky, kx, c_in, c_out) order. `k` is odd so the
/// same-padding window is centered.
struct ConvKernel {
  int k = 1;
  int in_channels = 1;
  int out_channels = 1;
  std::vector<double> data;

  ConvKernel() : data(1, 0.0) {}
  explicit ConvKernel(KernelShape shape, double fill = 0.0);
  ConvKernel(KernelShape shape, std::vector<double> values);

  KernelShape shape() const { return {k, in_channels, out_channels}; }
  std::size_t index(int ky, int kx, int ci, int co) const {
    return ((static_cast<std::size_t>(ky) * k + kx) * in_channels + ci) * out_channels + co;
  }
  double& at(int ky, int kx, int ci, int co) { return data[index(ky, kx, ci, co)]; }
  double at(int ky, int kx, int ci, int co) const { return data[index(ky, kx, ci, co)]; }

  bool same_shape(const ConvKernel& o) const {
    return k == o.k && in_channels == o.in_channels && out_channels == o.out_channels;
  }

  /// 1 x 1 kernel mapping channel i to channel i.
  static ConvKernel identity(int channels);
};

double dot(std::span<const double> a, std::span<const double> b);
double squared_norm(std::span<const double> a);

/// y += alpha * x, sizes must match.
void axpy(double alpha, std::span<const double> x, std::span<double> y);

/// Throws DimensionError if `shape` is not a valid kernel shape.
void validate_kernel_shape(const KernelShape& shape);

}  // namespace eagle
