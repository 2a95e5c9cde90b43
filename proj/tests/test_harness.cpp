#include <cmath>
#include <numbers>

#include <doctest.h>

#include "check_support.hpp"
#include "eagle/errors.hpp"
#include "eagle/harness/io.hpp"
#include "eagle/harness/metrics.hpp"
#include "eagle/harness/scenario.hpp"

using namespace eagle;
using namespace eagle::harness;

namespace {

TrackOutput perfect_track(const Scenario& s) {
  TrackOutput t;
  t.interval = s.gt_interval;
  for (std::size_t f = 0; f < s.frame_count(); ++f) {
    SegmentationResult r;
    r.frame_index = static_cast<int>(f);
    r.mask = s.gt_masks[f];
    r.bbox = s.gt_boxes[f];
    r.prob = ScoreMap(s.height, s.width, 0.0);
    t.results.push_back(r);
    if (s.has_geometry() && s.gt_interval && s.gt_interval->contains(static_cast<int>(f))) {
      t.displacements.push_back({static_cast<int>(f), gt_displacement(s, f)});
    }
  }
  return t;
}

}  // namespace

TEST_CASE("gen_scenario") {
  const Scenario s = gen_scenario(5, Preset::Identity);
  for (const auto& m : s.gt_masks) CHECK(m.data == s.gt_masks[0].data);
  CHECK(scenario_to_json(gen_scenario(5, Preset::Drift)) == scenario_to_json(gen_scenario(5, Preset::Drift)));
  auto bad = preset_params(Preset::Identity);
  bad.frames = 0;
  CHECK_THROWS_AS(gen_scenario(1, bad), ParameterError);
  bad = preset_params(Preset::Identity);
  bad.height = 4;
  CHECK_THROWS_AS(gen_scenario(1, bad), ParameterError);
  CHECK_FALSE(parse_preset("nope"));
}

TEST_CASE("eval_2d") {
  const Scenario s = gen_scenario(5, Preset::Absence);
  const auto perfect = eval_2d(perfect_track(s), s);
  CHECK(perfect.tAP25 == 1.0);
  CHECK(perfect.stAP25 == 1.0);
  CHECK(perfect.recovery_pct == 100.0);
  CHECK(perfect.success_pct == 100.0);
  TrackOutput none = perfect_track(s);
  none.interval.reset();
  const auto zero = eval_2d(none, s);
  CHECK(zero.tAP25 == 0.0);
  CHECK(zero.stAP25 == 0.0);
  CHECK(zero.recovery_pct == 0.0);
  CHECK(zero.success_pct == 0.0);
}

TEST_CASE("eval_3d") {
  const Scenario s = gen_scenario(5, Preset::Geo);
  const TrackOutput t = perfect_track(s);
  const auto m = eval_3d(t, s);
  CHECK(*m.l2 == 0.0);
  CHECK(*m.angle == 0.0);
  CHECK(m.success_pct == 100.0);
  TrackOutput flipped = t;
  for (auto& d : flipped.displacements) d.delta = -d.delta;
  CHECK(*eval_3d(flipped, s).angle == doctest::Approx(std::numbers::pi).epsilon(1e-12));
}

TEST_CASE("file formats") {
  const Scenario s = gen_scenario(2, Preset::Geo);
  const std::string text = scenario_to_json(s);
  CHECK(scenario_to_json(scenario_from_json(text)) == text);

  PipelineConfig cfg;
  cfg.update_stride = 10;
  cfg.decoder.bias = -3.0;
  const PipelineConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.update_stride == 10);
  CHECK(back.decoder.bias == -3.0);
  CHECK(config_from_json(R"({"format": "eagle-config", "version": 1})").clip_length == 32);

  CHECK_THROWS_AS(config_from_json("{\"format\": \"eagle-config\", \"version\": 1, \"bogus\": 2}"), SchemaError);
  CHECK_THROWS_AS(config_from_json("{\"format\": \"eagle-config\", \"version\": 1, \"update_stride\": \"x\"}"),
                  SchemaError);
  CHECK_THROWS_AS(scenario_from_json("{\"format\": \"eagle-track\", \"version\": 1}"), SchemaError);
  CHECK_THROWS_AS(scenario_from_json("{ not json"), SchemaError);
  CHECK_THROWS_AS(track_from_json("[]"), SchemaError);
  try {
    config_from_json("{\"format\": \"eagle-config\", \"version\": 1, \"reweighter\": {\"blur_sigma\": true}}");
    FAIL("expected a schema error");
  } catch (const SchemaError& e) {
    CHECK(std::string(e.what()).find("/reweighter/blur_sigma") != std::string::npos);
  }
  CHECK_THROWS_AS(read_file("/nonexistent/eagle.json"), IoError);
}

TEST_CASE("derived harness checks") { run_derived("harness."); }
