#pragma once

#include <optional>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eagle/amm.hpp"
#include "eagle/fusion.hpp"
#include "eagle/geo3d.hpp"
#include "eagle/glm.hpp"

namespace eagle {

struct PipelineConfig {
  int clip_length = 32;
  int dense_update_horizon = 100;
  int update_stride = 25;
  int amm_iters_init = 10;
  int amm_iters_update = 3;
  int glm_iters_init = 10;
  int glm_iters_update = 3;
  double admit_threshold = 0.6;
  double halt_threshold = 0.4;
  int halt_window = 25;
  double temporal_ratio = 0.8;
  int median_window = 5;
  int capacity = 50;
  double zeta = 1.0;
  double lambda_thr = 0.5;

  int sample_resolution = 32;
  int seg_kernel = 3;
  int track_kernel = 3;
  int label_channels = 3;
  double seg_regularizer = 0.01;
  double track_regularizer = 0.1;
  double mask_threshold = 0.5;

  // update-source rule for the tracking bank
  int source_window = 25;
  double source_high_ratio = 0.5;
  double source_min_fraction = 0.6;

  TargetReweighter reweighter{};
  SpatialWeightFn spatial_weight{};
  ScoreEncoder score_encoder{3, 1.0, 0.0};
  Decoder decoder{10.0, -4.0};

  /// Off: both banks and filters stay at their post-initialize state.
  bool updates_enabled = true;

  void validate() const;
};

/// True for frames 0 .. horizon-1 and every stride-th frame afterwards.
bool is_update_frame(int frame_index, const PipelineConfig& cfg);

struct QuerySpec {
  FeatureMap feature;
  BinaryMask mask;
  int frame_index = 0;
};

struct UpdateEvent {
  int frame_index = 0;
  UpdateSource source = UpdateSource::Dynamic;
  DescentTrace seg_trace;
  OptimizeTrace track_trace;
  std::size_t amm_size = 0;
  std::size_t glm_size = 0;
};

struct FrameDisplacement {
  int frame_index = 0;
  Eigen::Vector3d delta = Eigen::Vector3d::Zero();
};

struct TrackOutput {
  std::vector<SegmentationResult> results;
  std::optional<TemporalInterval> interval;
  std::vector<double> peaks;
  std::optional<Eigen::Vector3d> world_point;
  std::vector<FrameDisplacement> displacements;
};

/// The horizontal flip, (+2, +2) shift and 3x3 feature blur used to seed the appearance bank.
std::vector<AmmSample> augment_query_sample(const AmmSample& base);

class Pipeline {
 public:
  /// Seeds both banks from the query and runs the initial optimization.
  /// Throws EmptyInputError for an empty query mask.
  Pipeline(const QuerySpec& query, const PipelineConfig& cfg = {});

  SegmentationResult step_frame(const FeatureMap& frame_feature, int frame_index);

  /// Temporal localization over every frame stepped so far.
  TrackOutput finalize_2d() const;

  const PipelineConfig& config() const { return cfg_; }
  const AmmMemory& amm_memory() const { return amm_; }
  const GlmMemory& glm_memory() const { return glm_; }
  const AmmMemory& initial_amm_memory() const { return amm_init_; }
  const GlmMemory& initial_glm_memory() const { return glm_init_; }
  const SegFilter& seg_filter() const { return seg_; }
  const TrackFilter& track_filter() const { return track_; }
  const DescentTrace& init_seg_trace() const { return init_seg_trace_; }
  const OptimizeTrace& init_track_trace() const { return init_track_trace_; }
  const std::vector<UpdateEvent>& update_events() const { return events_; }
  const std::vector<SegmentationResult>& results() const { return results_; }
  const std::vector<double>& peaks() const { return peaks_; }
  bool halted() const { return halted_; }
  std::optional<int> halt_frame() const { return halt_frame_; }

 private:
  void update(const FeatureMap& frame_feature, const SegmentationResult& result);
  bool should_halt() const;

  PipelineConfig cfg_;
  int channels_;
  AmmMemory amm_;
  GlmMemory glm_;
  SegFilter seg_;
  TrackFilter track_;
  AmmMemory amm_init_;
  GlmMemory glm_init_;
  SegFilter seg_init_;
  TrackFilter track_init_;
  DescentTrace init_seg_trace_;
  OptimizeTrace init_track_trace_;
  std::vector<UpdateEvent> events_;
  std::vector<SegmentationResult> results_;
  std::vector<double> peaks_;
  bool halted_ = false;
  std::optional<int> halt_frame_;
};

/// Runs a whole video through one pipeline in clips of cfg.clip_length frames
/// (state carries over between clips); frame i gets index i.
TrackOutput track_video(const QuerySpec& query, std::span<const FeatureMap> frames, const PipelineConfig& cfg = {});

struct Geo3dOptions {
  double zeta = 1.0;
  double lambda_thr = 0.5;
  SemanticWeights weights{};
};

/// Rounded centroid (u = column, v = row) of the largest mask component.
std::optional<std::pair<int, int>> response_pixel(const SegmentationResult& r);

/// Aligns the reconstruction to the benchmark frame, back-projects the mask
/// center of every interval frame with a valid depth there, aggregates with
/// fused weights and attaches per-frame relative displacements. Throws
/// NoDetectionError when there is no interval or no usable view.
TrackOutput finalize_3d(const TrackOutput& track, std::span<const CameraFrame> cameras,
                        std::span<const AlignmentPair> alignment_pairs, const Geo3dOptions& opt = {});

}  // namespace eagle
