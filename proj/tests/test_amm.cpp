#include <cmath>
#include <random>

#include <doctest.h>

#include "check_support.hpp"
#include "eagle/amm.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/crop.hpp"
#include "eagle/errors.hpp"

using namespace eagle;

namespace {

AmmMemory memory_of(const std::vector<AmmSample>& samples, int res) {
  AmmMemory mem(50, res);
  for (const auto& s : samples) mem.update(s);
  return mem;
}

}  // namespace

TEST_CASE("encode_pseudo_label") {
  const FeatureMap empty = encode_pseudo_label(BinaryMask(4, 4));
  for (double v : empty.data) CHECK(v == 0.0);
  BinaryMask one(4, 4);
  one.set(1, 2, true);
  const FeatureMap e = encode_pseudo_label(one);
  CHECK(e.channels == 3);
  for (int c = 0; c < 3; ++c) CHECK(e.at(1, 2, c) == 1.0);
  CHECK_THROWS_AS(encode_pseudo_label(one, PseudoLabelEncoder{2}), ParameterError);
}

TEST_CASE("reweight") {
  const TargetReweighter rw;
  for (double v : reweight(BinaryMask(5, 5), rw).data) CHECK(v == rw.background_weight);
  BinaryMask full(5, 5);
  std::fill(full.data.begin(), full.data.end(), 1);
  const TargetReweighter sharp{1.0, 0.25, 0.0};
  for (double v : reweight(full, sharp).data) CHECK(v == 1.0);
}

TEST_CASE("seg_loss") {
  std::mt19937_64 rng(11);
  BinaryMask m(4, 4);
  std::vector<AmmSample> zero_label{{oracle::random_feature(rng, 4, 4, 2), BinaryMask(4, 4), 1.0}};
  const SegFilter z = SegFilter::zeros(3, 2, 3);
  CHECK(seg_loss(z, memory_of(zero_label, 4)) == 0.0);

  m.set(1, 1, true);
  m.set(1, 2, true);
  std::vector<AmmSample> one{{oracle::random_feature(rng, 4, 4, 2), m, 1.0}};
  const FeatureMap qm = encode_pseudo_label(m);
  const ScoreMap w = reweight(m);
  double ref = 0.0;
  for (int y = 0; y < 4; ++y) {
    for (int x = 0; x < 4; ++x) {
      for (int c = 0; c < 3; ++c) ref += 0.5 * std::pow(w.at(y, x) * qm.at(y, x, c), 2);
    }
  }
  CHECK(seg_loss(z, memory_of(one, 4)) == doctest::Approx(ref).epsilon(1e-14));
  CHECK_THROWS_AS(seg_loss(SegFilter::zeros(3, 3, 3), memory_of(one, 4)), DimensionError);
}

TEST_CASE("seg_gradient") {
  std::mt19937_64 rng(12);
  const auto samples = oracle::random_amm_samples(rng, 3, 4, 4, 2);
  const AmmMemory mem = memory_of(samples, 4);
  const KernelShape sh{3, 2, 3};
  const SegFilter opt{oracle::seg_normal_equations(samples, sh, {}, {}, 0.01), 0.01};
  CHECK(std::sqrt(squared_norm(seg_gradient(opt, mem).data)) < 1e-8);

  // zero features switch the data term off, leaving only the ridge
  AmmMemory blank(50, 4);
  blank.update(AmmSample{FeatureMap(4, 4, 2, 0.0), samples[0].mask, 1.0});
  const ConvKernel s = oracle::random_kernel(rng, sh);
  ConvKernel st = s;
  for (double& v : st.data) v *= 3.0;
  const ConvKernel g = seg_gradient(SegFilter{st, 0.5}, blank);
  for (std::size_t i = 0; i < g.data.size(); ++i) CHECK(g.data[i] == doctest::Approx(0.5 * 3.0 * s.data[i]).epsilon(1e-15));
}

TEST_CASE("steepest_step_size") {
  AmmSample s{FeatureMap(1, 1, 2, 0.0), BinaryMask(1, 1), 1.0};
  s.feature.data[0] = 1.0;
  s.mask.set(0, 0, true);
  AmmMemory mem(50, 1);
  mem.update(s);
  const TargetReweighter unit{1.0, 1.0, 1.0};
  ConvKernel g({1, 2, 3}, 0.0);
  g.at(0, 0, 0, 1) = 0.3;
  g.at(0, 0, 0, 2) = -1.1;
  CHECK(*steepest_step_size(g, mem, unit, 0.0) == doctest::Approx(1.0).epsilon(1e-12));
  AmmMemory blank(50, 1);
  blank.update(AmmSample{FeatureMap(1, 1, 2, 0.0), s.mask, 1.0});
  CHECK(*steepest_step_size(g, blank, {}, 0.25) == doctest::Approx(4.0).epsilon(1e-12));
  CHECK_THROWS_AS(reweight(s.mask, TargetReweighter{0.0, 0.0, 1.0}), ParameterError);
  CHECK_FALSE(steepest_step_size(ConvKernel({1, 2, 3}), mem, unit, 0.1).has_value());
}

TEST_CASE("steepest_descent") {
  std::mt19937_64 rng(13);
  const auto samples = oracle::random_amm_samples(rng, 2, 5, 5, 2);
  const AmmMemory mem = memory_of(samples, 5);
  const SegFilter init{oracle::random_kernel(rng, {3, 2, 3}), 0.01};
  CHECK(steepest_descent(init, mem, 0).kernel.data == init.kernel.data);
  DescentTrace tr;
  steepest_descent(init, mem, 10, {}, {}, &tr);
  CHECK(tr.losses.size() >= 2);
  CHECK_THROWS_AS(steepest_descent(init, mem, -1), ParameterError);
}

TEST_CASE("amm_admit") {
  BinaryMask m(1, 2);
  ScoreMap p(1, 2, 0.6);
  CHECK_FALSE(amm_admit(p, m));
  m.set(0, 0, true);
  m.set(0, 1, true);
  CHECK(amm_admit(p, m));
  p.data = {0.9, 0.2};
  CHECK_FALSE(amm_admit(p, m));
}

TEST_CASE("crop_sample") {
  BinaryMask m(64, 64);
  for (int y = 27; y < 37; ++y) {
    for (int x = 27; x < 37; ++x) m.set(y, x, true);
  }
  const CropWindow w = mask_crop_window(m);
  CHECK(w.side == 15.0);
  CHECK(w.scale == 1.5);
  CHECK(w.padded_fraction == 0.0);
  std::mt19937_64 rng(14);
  const AmmSample s = crop_sample(oracle::random_feature(rng, 64, 64, 2), m, 32);
  CHECK(s.feature.height == 32);
  CHECK(s.mask.width == 32);
  CHECK_THROWS_AS(crop_sample(FeatureMap(64, 64, 2), BinaryMask(64, 64), 32), EmptyInputError);
}

TEST_CASE("amm_update") {
  AmmMemory two(2, 2);
  for (int i = 0; i < 3; ++i) amm_update(two, AmmSample{FeatureMap(2, 2, 1, i), BinaryMask(2, 2), 1.0});
  REQUIRE(two.size() == 2);
  CHECK(two.entries()[0].feature.data[0] == 1.0);
  CHECK(two.entries()[1].feature.data[0] == 2.0);
  AmmMemory full(50, 2);
  for (int i = 0; i < 50; ++i) amm_update(full, AmmSample{FeatureMap(2, 2, 1, i), BinaryMask(2, 2), 1.0});
  CHECK(full.size() == 50);
  CHECK(full.entries().front().feature.data[0] == 0.0);
  CHECK_THROWS_AS(amm_update(full, AmmSample{FeatureMap(3, 3, 1), BinaryMask(3, 3), 1.0}), DimensionError);
}

TEST_CASE("derived amm checks") { run_derived("amm."); }
