#pragma once

#include <numbers>
#include <optional>

#include "eagle/harness/scenario.hpp"
#include "eagle/pipeline.hpp"

namespace eagle::harness {

/// Single-query desk metrics. With one prediction per query the AP-style
/// scores reduce to 0/1 hits at the 0.25 IoU level.
struct MetricsReport2D {
  double tAP25 = 0.0;
  double stAP25 = 0.0;
  double recovery_pct = 0.0;
  double success_pct = 0.0;
  double temporal_iou = 0.0;
  double spatiotemporal_iou = 0.0;
};

/// Frame-count IoU of two inclusive intervals.
double temporal_iou(const TemporalInterval& a, const TemporalInterval& b);

/// Mean per-frame box IoU over the union of the two intervals; frames outside
/// the overlap, or without a box on either side, count as zero.
double tube_iou(const TrackOutput& pred, const Scenario& gt);

/// tAP25: temporal IoU >= 0.25. stAP25: tube IoU >= 0.25.
/// recovery: % of ground-truth interval frames whose predicted box (inside the
/// predicted interval) has IoU >= 0.5. success: 100 if any predicted box in the
/// predicted interval has IoU >= 0.05 with the ground truth, else 0.
MetricsReport2D eval_2d(const TrackOutput& pred, const Scenario& gt);

struct Thresholds3D {
  double l2 = 6.0;                            // meters
  double angle = std::numbers::pi / 2.0;      // radians
};

struct MetricsReport3D {
  double success_pct = 0.0;
  double success_star_pct = 0.0;
  std::optional<double> l2;     // mean over frames with a predicted displacement
  std::optional<double> angle;  // radians
  double qwp_pct = 0.0;
};

/// Angle between two vectors in [0, pi]; zero vectors give 0.
double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b);

/// L2 and angle are averaged over frames carrying a predicted displacement.
/// success: mean L2 < thresholds.l2 and mean angle < thresholds.angle.
/// success*: the same using only frames with a valid pose.
/// QwP: % of predicted-interval frames whose pose is valid.
MetricsReport3D eval_3d(const TrackOutput& pred, const Scenario& gt, const Thresholds3D& thresholds = {});

}  // namespace eagle::harness
