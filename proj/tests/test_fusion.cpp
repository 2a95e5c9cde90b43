#include <cmath>
#include <random>

#include <doctest.h>

#include "check_support.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/errors.hpp"
#include "eagle/fusion.hpp"

using namespace eagle;

TEST_CASE("encode_score") {
  ScoreMap neg(2, 3, -0.4);
  neg.at(1, 1) = 0.0;
  for (double v : encode_score(neg).data) CHECK(v == 0.0);

  ScoreMap pos(2, 2);
  pos.data = {0.0, 0.5, 1.5, 2.0};
  const FeatureMap e = encode_score(pos);
  CHECK(e.channels == 3);
  for (int c = 0; c < 3; ++c) CHECK(e.at(1, 0, c) == 1.5);

  const FeatureMap twice = encode_score(ScoreMap(1, 1, 0.3), ScoreEncoder{3, 2.0, 0.0});
  for (double v : twice.data) CHECK(v == doctest::Approx(0.6).epsilon(1e-15));
}

TEST_CASE("fuse") {
  std::mt19937_64 rng(31);
  const FeatureMap a = oracle::random_feature(rng, 3, 4, 2);
  CHECK(fuse(a, FeatureMap(3, 4, 2, 0.0)).data == a.data);
  const FeatureMap b = oracle::random_feature(rng, 3, 4, 2);
  CHECK(fuse(a, b).data == fuse(b, a).data);
  CHECK_THROWS_AS(fuse(a, FeatureMap(3, 4, 3)), DimensionError);
}

TEST_CASE("decode") {
  for (double v : decode(FeatureMap(2, 2, 3, 0.0)).data) CHECK(v == 0.5);
  double prev = 0.0;
  for (double x : {-20.0, -1.0, 0.0, 1.0, 5.0, 30.0}) {
    const double p = decode(FeatureMap(1, 1, 2, x)).data[0];
    CHECK(p > prev);
    CHECK(p <= 1.0);
    prev = p;
  }
  CHECK(decode(FeatureMap(1, 1, 2, 40.0)).data[0] == doctest::Approx(1.0));
}

TEST_CASE("extract_result") {
  const auto none = extract_result(ScoreMap(4, 4, 0.4), 3);
  CHECK(none.mask.empty());
  CHECK(none.s_conf == 0.0);
  CHECK_FALSE(none.bbox);
  CHECK(none.frame_index == 3);

  ScoreMap p(5, 5, 0.1);
  p.at(1, 2) = p.at(1, 3) = p.at(2, 2) = p.at(2, 3) = 0.9;
  const auto r = extract_result(p, 0);
  CHECK(r.bbox == BBox{2, 1, 3, 2});
  CHECK(r.s_conf == doctest::Approx(0.9).epsilon(1e-15));
  CHECK(r.mask.count() == 4);
}

TEST_CASE("temporal_localize") {
  CHECK_FALSE(temporal_localize(std::vector<double>(12, 0.0)));
  CHECK_THROWS_AS(temporal_localize(std::vector<double>{}), EmptyInputError);
}

TEST_CASE("derived fusion checks") { run_derived("fusion."); }
