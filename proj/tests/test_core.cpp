#include <cmath>
#include <random>

#include <doctest.h>

#include "check_support.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/conv.hpp"
#include "eagle/errors.hpp"
#include "eagle/mask_ops.hpp"
#include "eagle/signal.hpp"
#include "eagle/tensor.hpp"

using namespace eagle;

TEST_CASE("conv2d") {
  std::mt19937_64 rng(1);
  const FeatureMap x = oracle::random_feature(rng, 5, 6, 3);
  CHECK(conv2d(x, ConvKernel::identity(3)).data == x.data);

  const FeatureMap ones(4, 4, 1, 1.0);
  const FeatureMap y = conv2d(ones, ConvKernel({3, 1, 1}, 1.0));
  CHECK(y.at(1, 1, 0) == 9.0);
  CHECK(y.at(2, 2, 0) == 9.0);
  CHECK(y.at(0, 0, 0) == 4.0);
  CHECK(y.at(3, 3, 0) == 4.0);
  CHECK(y.at(0, 1, 0) == 6.0);

  CHECK_THROWS_AS(conv2d(x, ConvKernel({3, 2, 1})), DimensionError);

  const FeatureMap b = oracle::random_feature(rng, 5, 6, 3);
  const ConvKernel k = oracle::random_kernel(rng, {3, 3, 2});
  FeatureMap mix(5, 6, 3);
  for (std::size_t i = 0; i < mix.data.size(); ++i) mix.data[i] = 2.0 * x.data[i] - 0.5 * b.data[i];
  const FeatureMap lhs = conv2d(mix, k), cx = conv2d(x, k), cb = conv2d(b, k);
  std::vector<double> rhs(lhs.data.size());
  for (std::size_t i = 0; i < rhs.size(); ++i) rhs[i] = 2.0 * cx.data[i] - 0.5 * cb.data[i];
  CHECK(oracle::relative_error(lhs.data, rhs) < 1e-12);
}

TEST_CASE("conv2d_transpose") {
  std::mt19937_64 rng(2);
  const FeatureMap x = oracle::random_feature(rng, 4, 3, 2);
  CHECK(conv2d_transpose(x, ConvKernel::identity(2)).data == x.data);
  const FeatureMap zero(4, 3, 2, 0.0);
  for (double v : conv2d_transpose(zero, oracle::random_kernel(rng, {3, 5, 2})).data) CHECK(v == 0.0);
  CHECK_THROWS_AS(conv2d_transpose(x, ConvKernel({3, 2, 3})), DimensionError);
}

TEST_CASE("kernel_gradient") {
  std::mt19937_64 rng(3);
  const FeatureMap x = oracle::random_feature(rng, 4, 5, 2);
  for (double v : kernel_gradient(x, FeatureMap(4, 5, 3, 0.0), {3, 2, 3}).data) CHECK(v == 0.0);

  const FeatureMap r = oracle::random_feature(rng, 4, 5, 3);
  const ConvKernel g = kernel_gradient(x, r, {1, 2, 3});
  for (int ci = 0; ci < 2; ++ci) {
    for (int co = 0; co < 3; ++co) {
      double s = 0.0;
      for (int y = 0; y < 4; ++y) {
        for (int xx = 0; xx < 5; ++xx) s += x.at(y, xx, ci) * r.at(y, xx, co);
      }
      CHECK(g.at(0, 0, ci, co) == doctest::Approx(s).epsilon(1e-12));
    }
  }
  CHECK_THROWS_AS(kernel_gradient(x, FeatureMap(3, 5, 3), {1, 2, 3}), DimensionError);
}

TEST_CASE("gaussian_label") {
  const ScoreMap a = gaussian_label(2, 2, 0.7, 5, 5);
  CHECK(a.at(2, 2) == 1.0);
  CHECK(gaussian_label(2, 2, 1.0, 5, 5).at(2, 3) == doctest::Approx(std::exp(-0.5)).epsilon(1e-15));
  const ScoreMap wide = gaussian_label(1, 1, 1e4, 4, 4);
  for (double v : wide.data) CHECK(v > 0.9999);
  CHECK_THROWS_AS(gaussian_label(1, 1, 0.0, 3, 3), ParameterError);
}

TEST_CASE("connected_components") {
  CHECK(connected_components(BinaryMask(4, 4)).empty());
  BinaryMask diag(3, 3);
  diag.set(0, 0, true);
  diag.set(1, 1, true);
  CHECK(connected_components(diag).size() == 2);
}

TEST_CASE("min_bounding_rect") {
  const std::vector<Pixel> one{{3, 5}};
  CHECK(min_bounding_rect(one) == BBox{5, 3, 5, 3});
  const std::vector<Pixel> two{{0, 0}, {2, 4}};
  CHECK(min_bounding_rect(two) == BBox{0, 0, 4, 2});
  CHECK_THROWS_AS(min_bounding_rect(std::vector<Pixel>{}), EmptyInputError);
}

TEST_CASE("median_filter_1d") {
  const std::vector<double> flat(7, 2.5);
  CHECK(median_filter_1d(flat, 5) == flat);
  const std::vector<double> spike{0, 0, 9, 0, 0};
  CHECK(median_filter_1d(spike, 5)[2] == 0.0);
  CHECK_THROWS_AS(median_filter_1d(spike, 4), ParameterError);
  CHECK_THROWS_AS(median_filter_1d(std::vector<double>{}, 5), EmptyInputError);
}

TEST_CASE("derived core checks") { run_derived("core."); }
