#pragma once

#include <optional>
#include <span>

#include "eagle/mask_ops.hpp"
#include "eagle/tensor.hpp"

namespace eagle {

/// Tracking-score encoder: every output channel is max(0, gain * H_J + bias).
struct ScoreEncoder {
  int out_channels = 3;
  double gain = 1.0;
  double bias = 0.0;
};

FeatureMap encode_score(const ScoreMap& response, const ScoreEncoder& enc = {});

/// Element-wise sum of two equally shaped maps.
FeatureMap fuse(const FeatureMap& appearance, const FeatureMap& tracking);

/// Probability decoder: logistic(gain * mean_c F_N + bias). The defaults give
/// the plain logistic of the channel mean.
struct Decoder {
  double gain = 1.0;
  double bias = 0.0;
};

ScoreMap decode(const FeatureMap& fused, const Decoder& dec = {});

struct SegmentationResult {
  ScoreMap prob;
  BinaryMask mask;
  std::optional<BBox> bbox;  // largest component of the mask
  double s_conf = 0.0;       // mean prob over the mask, 0 when empty
  int frame_index = 0;
};

/// Thresholds prob at `mask_threshold` (inclusive). The bbox comes from the
/// largest 4-connected component; ties go to the component whose first
/// row-major pixel comes first.
SegmentationResult extract_result(const ScoreMap& prob, int frame_index, double mask_threshold = 0.5);

struct TemporalInterval {
  int start_frame = 0;
  int end_frame = 0;  // inclusive

  int length() const { return end_frame - start_frame + 1; }
  bool contains(int f) const { return f >= start_frame && f <= end_frame; }
  bool operator==(const TemporalInterval&) const = default;
};

/// Median-filters the confidence sequence, thresholds at ratio * max, and
/// returns the last maximal run at or above the threshold. nullopt when the
/// filtered maximum is not positive.
std::optional<TemporalInterval> temporal_localize(std::span<const double> s_conf, int window = 5, double ratio = 0.8);

}  // namespace eagle
