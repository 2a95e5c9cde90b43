#include <cmath>
#include <random>

#include <doctest.h>

#include "check_support.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/errors.hpp"
#include "eagle/glm.hpp"
#include "eagle/mask_ops.hpp"

using namespace eagle;

namespace {

GlmSample flat_sample(int n, int c, double label, double region) {
  return GlmSample{FeatureMap(n, n, c, 0.0), ScoreMap(n, n, label), ScoreMap(n, n, region), SnapshotKind::Static};
}

}  // namespace

TEST_CASE("spatial_weight") {
  const SpatialWeightFn fn;
  for (double v : spatial_weight(ScoreMap(3, 3, 0.0), fn).data) CHECK(v == fn.w_bg);
  const ScoreMap g = gaussian_label(1, 1, 1.0, 3, 3);
  CHECK(spatial_weight(g, fn).at(1, 1) == fn.w_fg);
  CHECK(spatial_weight(ScoreMap(2, 2, 0.5), fn).at(0, 0) == 0.625);
}

TEST_CASE("track_residual") {
  const SpatialWeightFn unit{1.0, 1.0};
  GlmSample s = flat_sample(3, 1, 0.0, 1.0);
  s.label = gaussian_label(1, 1, 1.0, 3, 3);
  for (double v : track_residual(s.label, s).data) CHECK(v == 0.0);

  const GlmSample hinge = flat_sample(3, 1, 0.0, 0.0);
  for (double v : track_residual(ScoreMap(3, 3, -5.0), hinge, unit).data) CHECK(v == 0.0);

  const GlmSample half = flat_sample(1, 1, 1.0, 0.5);
  CHECK(track_residual(ScoreMap(1, 1, 2.0), half, unit).data[0] == 1.0);
  CHECK_THROWS_AS(track_residual(ScoreMap(2, 2), half, unit), DimensionError);
}

TEST_CASE("track_loss") {
  GlmMemory zero(flat_sample(4, 2, 0.0, 0.5));
  CHECK(track_loss(TrackFilter::zeros(3, 2), zero) == 0.0);

  GlmSample s = flat_sample(4, 2, 0.0, 1.0);
  s.label = gaussian_label(1.5, 1.5, 1.0, 4, 4);
  const GlmMemory one(s);
  const ScoreMap sw = spatial_weight(s.label);
  double ref = 0.0;
  for (std::size_t i = 0; i < sw.data.size(); ++i) ref += std::pow(sw.data[i] * s.label.data[i], 2);
  CHECK(track_loss(TrackFilter::zeros(1, 2), one) == doctest::Approx(ref).epsilon(1e-14));
  CHECK_THROWS_AS(track_loss(TrackFilter::zeros(1, 3), one), DimensionError);
}

TEST_CASE("track_gradient") {
  const GlmMemory zero(flat_sample(4, 2, 0.0, 1.0));
  for (double v : track_gradient(TrackFilter::zeros(3, 2), zero).data) CHECK(v == 0.0);
}

TEST_CASE("gauss_newton_step") {
  std::mt19937_64 rng(21);
  const double lambda = 0.2;
  const GlmMemory mem(flat_sample(4, 2, 0.3, 0.5));  // zero features: only the ridge acts
  const TrackFilter c{oracle::random_kernel(rng, {3, 2, 1}), lambda};
  const auto step = gauss_newton_step(c, mem);
  REQUIRE(step);
  CHECK(step->beta == doctest::Approx(1.0 / (2.0 * lambda * lambda)).epsilon(1e-14));
  CHECK_FALSE(gauss_newton_step(TrackFilter::zeros(3, 2, lambda), GlmMemory(flat_sample(4, 2, 0.0, 1.0))));
}

TEST_CASE("optimize_filter") {
  std::mt19937_64 rng(22);
  const auto samples = oracle::random_glm_samples(rng, 3, 5, 5, 2, false);
  GlmMemory mem(samples[0]);
  mem.push_dynamic(samples[1]);
  const TrackFilter c0{oracle::random_kernel(rng, {3, 2, 1}), 0.1};
  CHECK(optimize_filter(c0, mem, 0).kernel.data == c0.kernel.data);
  OptimizeTrace tr;
  const TrackFilter c = optimize_filter(c0, mem, 10, {}, &tr);
  CHECK(track_loss(c, mem) <= track_loss(c0, mem));
  CHECK_THROWS_AS(optimize_filter(c0, mem, -2), ParameterError);
}

TEST_CASE("glm_make_dynamic_sample") {
  std::mt19937_64 rng(23);
  const FeatureMap f = oracle::random_feature(rng, 64, 64, 2);
  const BBox b{27, 27, 36, 36};
  ScoreMap prob(64, 64, 0.0);
  const GlmSample s = glm_make_dynamic_sample(f, b, prob, 32);
  double best = -1.0;
  int by = -1, bx = -1;
  for (int y = 0; y < 32; ++y) {
    for (int x = 0; x < 32; ++x) {
      if (s.label.at(y, x) > best) {
        best = s.label.at(y, x);
        by = y;
        bx = x;
      }
    }
  }
  CHECK((by == 15 || by == 16));
  CHECK((bx == 15 || bx == 16));
  CHECK(s.label.at(15, 15) == s.label.at(16, 16));
  CHECK(glm_label_sigma(30.0) == 5.0);
  CHECK_THROWS_AS(glm_make_dynamic_sample(f, BBox{5, 5, 4, 9}, prob, 32), EmptyInputError);
}

TEST_CASE("glm_update_source") {
  const std::vector<double> equal(30, 0.7);
  CHECK(glm_update_source(equal) == UpdateSource::Dynamic);
  std::vector<double> drop(30, 0.0);
  drop[0] = 1.0;
  CHECK(glm_update_source(drop) == UpdateSource::Static);
  CHECK_THROWS_AS(glm_update_source(std::vector<double>{}), EmptyInputError);
}

TEST_CASE("static snapshot") {
  std::mt19937_64 rng(24);
  const auto samples = oracle::random_glm_samples(rng, 60, 4, 4, 2, false);
  GlmMemory mem(samples[0]);
  for (std::size_t i = 1; i < samples.size(); ++i) mem.push_dynamic(samples[i]);
  CHECK(mem.size() == 50);
  CHECK(mem.static_entry().feature.data == samples[0].feature.data);
  CHECK(mem.dynamic_entries().back().feature.data == samples.back().feature.data);
}

TEST_CASE("derived glm checks") { run_derived("glm."); }
