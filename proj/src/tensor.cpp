#include "eagle/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <string>

#include "eagle/errors.hpp"

namespace eagle {

namespace {

void check_dims(int h, int w, int c) {
  if (h <= 0 || w <= 0 || c <= 0) {
    throw DimensionError("tensor dimensions must be positive, got " + std::to_string(h) + "x" +
                         std::to_string(w) + "x" + std::to_string(c));
  }
}

}  // namespace

FeatureMap::FeatureMap(int h, int w, int c, double fill) : height(h), width(w), channels(c) {
  check_dims(h, w, c);
  data.assign(static_cast<std::size_t>(h) * w * c, fill);
}

FeatureMap::FeatureMap(int h, int w, int c, std::vector<double> values)
    : height(h), width(w), channels(c), data(std::move(values)) {
  check_dims(h, w, c);
  if (data.size() != static_cast<std::size_t>(h) * w * c) {
    throw DimensionError("feature map expects " + std::to_string(static_cast<std::size_t>(h) * w * c) +
                         " values, got " + std::to_string(data.size()));
  }
}

bool FeatureMap::all_finite() const {
  return std::all_of(data.begin(), data.end(), [](double v) { return std::isfinite(v); });
}

ScoreMap::ScoreMap(int h, int w, double fill) : height(h), width(w) {
  check_dims(h, w, 1);
  data.assign(static_cast<std::size_t>(h) * w, fill);
}

ScoreMap::ScoreMap(int h, int w, std::vector<double> values) : height(h), width(w), data(std::move(values)) {
  check_dims(h, w, 1);
  if (data.size() != static_cast<std::size_t>(h) * w) {
    throw DimensionError("score map expects " + std::to_string(static_cast<std::size_t>(h) * w) +
                         " values, got " + std::to_string(data.size()));
  }
}

double ScoreMap::max_value() const {
  return data.empty() ? -std::numeric_limits<double>::infinity() : *std::max_element(data.begin(), data.end());
}

BinaryMask::BinaryMask(int h, int w) : height(h), width(w) {
  check_dims(h, w, 1);
  data.assign(static_cast<std::size_t>(h) * w, 0);
}

BinaryMask::BinaryMask(int h, int w, std::vector<std::uint8_t> values)
    : height(h), width(w), data(std::move(values)) {
  check_dims(h, w, 1);
  if (data.size() != static_cast<std::size_t>(h) * w) {
    throw DimensionError("mask expects " + std::to_string(static_cast<std::size_t>(h) * w) + " values, got " +
                         std::to_string(data.size()));
  }
  for (auto v : data) {
    if (v > 1) throw ParameterError("mask values must be 0 or 1");
  }
}

std::size_t BinaryMask::count() const {
  return static_cast<std::size_t>(std::count(data.begin(), data.end(), std::uint8_t{1}));
}

void validate_kernel_shape(const KernelShape& shape) {
  if (shape.k <= 0 || shape.k % 2 == 0) {
    throw DimensionError("kernel size must be odd and positive, got " + std::to_string(shape.k));
  }
  if (shape.in_channels <= 0 || shape.out_channels <= 0) {
    throw DimensionError("kernel channel counts must be positive");
  }
}

ConvKernel::ConvKernel(KernelShape shape, double fill)
    : k(shape.k), in_channels(shape.in_channels), out_channels(shape.out_channels) {
  validate_kernel_shape(shape);
  data.assign(static_cast<std::size_t>(k) * k * in_channels * out_channels, fill);
}

ConvKernel::ConvKernel(KernelShape shape, std::vector<double> values)
    : k(shape.k), in_channels(shape.in_channels), out_channels(shape.out_channels), data(std::move(values)) {
  validate_kernel_shape(shape);
  if (data.size() != static_cast<std::size_t>(k) * k * in_channels * out_channels) {
    throw DimensionError("kernel value count does not match its shape");
  }
}

ConvKernel ConvKernel::identity(int channels) {
  ConvKernel out({1, channels, channels});
  for (int c = 0; c < channels; ++c) out.at(0, 0, c, c) = 1.0;
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionError("dot: size mismatch");
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double squared_norm(std::span<const double> a) { return std::inner_product(a.begin(), a.end(), a.begin(), 0.0); }

void axpy(double alpha, std::span<const double> x, std::span<double> y) {
  if (x.size() != y.size()) throw DimensionError("axpy: size mismatch");
  for (std::size_t i = 0; i < x.size(); ++i) y[i] += alpha * x[i];
}

}  // namespace eagle
