#include <cmath>

#include <Eigen/LU>
#include <doctest.h>

#include "check_support.hpp"
#include "eagle/errors.hpp"
#include "eagle/harness/scenario.hpp"
#include "eagle/pipeline.hpp"

using namespace eagle;

TEST_CASE("initialize") {
  const auto s = harness::gen_scenario(3, harness::Preset::Identity);
  const Pipeline p(s.query);
  CHECK(p.amm_memory().size() == 4);
  CHECK(p.glm_memory().size() == 1);
  CHECK(std::isfinite(p.init_seg_trace().losses.back()));
  CHECK(std::isfinite(p.init_track_trace().losses.back()));
  for (double v : seg_gradient(p.seg_filter(), p.amm_memory(), {}, {}).data) CHECK(std::isfinite(v));
  for (double v : track_gradient(p.track_filter(), p.glm_memory()).data) CHECK(std::isfinite(v));

  QuerySpec blank = s.query;
  blank.mask = BinaryMask(blank.mask.height, blank.mask.width);
  CHECK_THROWS_AS(Pipeline{blank}, EmptyInputError);
}

TEST_CASE("config validation") {
  PipelineConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.admit_threshold = 1.5;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
  cfg = {};
  cfg.update_stride = 0;
  CHECK_THROWS_AS(cfg.validate(), ParameterError);
}

TEST_CASE("update cadence") {
  const PipelineConfig cfg;
  std::vector<int> hits;
  for (int i = 0; i <= 200; ++i) {
    if (is_update_frame(i, cfg)) hits.push_back(i);
  }
  REQUIRE(hits.size() == 105);
  CHECK(hits[99] == 99);
  CHECK(std::vector<int>(hits.begin() + 100, hits.end()) == std::vector<int>{100, 125, 150, 175, 200});
}

TEST_CASE("step_frame dimension check") {
  const auto s = harness::gen_scenario(3, harness::Preset::Identity);
  Pipeline p(s.query);
  CHECK_THROWS_AS(p.step_frame(FeatureMap(s.height, s.width, s.channels + 1), 0), DimensionError);
}

TEST_CASE("finalize_3d") {
  const auto s = harness::gen_scenario(3, harness::Preset::Geo);
  TrackOutput track = track_video(s.query, s.frames);
  REQUIRE(track.interval);

  // a single response frame aggregates to its own back-projected centroid
  TrackOutput single = track;
  for (std::size_t i = 1; i < single.results.size(); ++i) {
    single.results[i].mask = BinaryMask(s.height, s.width);
    single.results[i].bbox.reset();
  }
  const TrackOutput out = finalize_3d(single, s.cameras, s.alignment_pairs);
  const auto px = response_pixel(single.results[0]);
  REQUIRE(px);
  const Sim3Transform align = align_sim3(s.alignment_pairs);
  const Eigen::Vector3d own = backproject(s.cameras[0], px->first, px->second, align);
  CHECK((*out.world_point - own).norm() < 1e-9);
  REQUIRE(!out.displacements.empty());
  const Eigen::Vector3d ray = s.cameras[0].depth.at(px->second, px->first) * s.cameras[0].intrinsics.inverse() *
                              Eigen::Vector3d(px->first, px->second, 1.0);
  CHECK((out.displacements[0].delta - ray).norm() < 1e-9);

  TrackOutput lost = track;
  lost.interval.reset();
  CHECK_THROWS_AS(finalize_3d(lost, s.cameras, s.alignment_pairs), NoDetectionError);
  CHECK_THROWS_AS(finalize_3d(track, std::span(s.cameras).first(2), s.alignment_pairs), DimensionError);
  CHECK_THROWS_AS(finalize_3d(track, s.cameras, std::span(s.alignment_pairs).first(2)), DegenerateError);
}

TEST_CASE("derived pipeline checks") { run_derived("pipeline."); }
