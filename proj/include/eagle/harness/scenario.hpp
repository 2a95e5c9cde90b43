#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "eagle/geo3d.hpp"
#include "eagle/pipeline.hpp"

namespace eagle::harness {

enum class Preset { Identity, Drift, Distractor, Absence, Geo };

std::optional<Preset> parse_preset(std::string_view name);
std::string preset_name(Preset p);

struct ScenarioParams {
  int frames = 60;
  int height = 48;
  int width = 48;
  int channels = 4;
  int object_size = 21;  // odd keeps the object center on a pixel
  double amplitude = 1.0;
  double noise = 0.05;
  /// Target signature rotates away from the query signature by this many radians per frame (capped at pi/2).
  double drift_rate = 0.0;
  int distractors = 0;  // at most 2, placed in opposite corners
  int distractor_size = 9;
  double distractor_similarity = 0.5;  // cosine to the query signature
  /// Frame runs where the target is visible; empty means every frame.
  std::vector<TemporalInterval> presence;
  double motion_amplitude = 0.0;  // pixels, horizontal sinusoid
  int motion_period = 40;
  /// Every frame reuses the query feature map verbatim.
  bool identical_frames = false;

  bool geometry = false;
  double camera_distance = 4.0;  // meters from the target
  double focal = 40.0;           // pixels
  double arc = 0.8;              // radians spanned by the cameras
  double background_depth_offset = 3.0;
  double depth_uncertainty = 0.05;
  int corrupted_view = -1;
  double corrupted_tau = 20.0;
  double corrupted_depth_scale = 1.3;
  int invalid_pose_view = -1;
  int alignment_points = 8;

  void validate() const;
};

ScenarioParams preset_params(Preset p);

struct Scenario {
  std::uint64_t seed = 0;
  std::string preset;
  int height = 0;
  int width = 0;
  int channels = 0;
  QuerySpec query;
  std::vector<FeatureMap> frames;
  std::vector<BinaryMask> gt_masks;
  std::vector<std::optional<BBox>> gt_boxes;
  std::optional<TemporalInterval> gt_interval;

  // geometry, present only for scenarios generated with cameras
  std::vector<CameraFrame> cameras;
  std::optional<Eigen::Vector3d> gt_point;  // benchmark frame
  std::optional<Sim3Transform> gt_alignment;
  std::vector<AlignmentPair> alignment_pairs;

  std::size_t frame_count() const { return frames.size(); }
  bool has_geometry() const { return !cameras.empty(); }
  /// Sequence lengths, map sizes and interval bounds.
  void validate() const;
};

/// Orthonormal channel signatures drawn from the seed: query, drift target and distractor directions.
struct Signatures {
  Eigen::VectorXd query;
  Eigen::VectorXd drift;
  Eigen::VectorXd other;
};

Signatures make_signatures(std::uint64_t seed, int channels);

/// Noise-free target signature at frame t.
Eigen::VectorXd target_signature(const Signatures& sig, const ScenarioParams& params, int t);

Scenario gen_scenario(std::uint64_t seed, const ScenarioParams& params, const std::string& preset_label = "custom");
Scenario gen_scenario(std::uint64_t seed, Preset preset);

/// Ground-truth displacement of the target in camera i's frame.
Eigen::Vector3d gt_displacement(const Scenario& s, std::size_t frame);

}  // namespace eagle::harness
