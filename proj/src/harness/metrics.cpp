#include "eagle/harness/metrics.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Geometry>

#include "eagle/errors.hpp"

namespace eagle::harness {

namespace {

std::optional<BBox> predicted_box(const TrackOutput& pred, int frame) {
  if (!pred.interval || !pred.interval->contains(frame)) return std::nullopt;
  if (frame < 0 || static_cast<std::size_t>(frame) >= pred.results.size()) return std::nullopt;
  return pred.results[static_cast<std::size_t>(frame)].bbox;
}

double frame_iou(const TrackOutput& pred, const Scenario& gt, int frame) {
  if (!gt.gt_interval || !gt.gt_interval->contains(frame)) return 0.0;
  const auto p = predicted_box(pred, frame);
  const auto& g = gt.gt_boxes[static_cast<std::size_t>(frame)];
  if (!p || !g) return 0.0;
  return box_iou(*p, *g);
}

}  // namespace

double temporal_iou(const TemporalInterval& a, const TemporalInterval& b) {
  const int inter = std::min(a.end_frame, b.end_frame) - std::max(a.start_frame, b.start_frame) + 1;
  if (inter <= 0) return 0.0;
  const int uni = a.length() + b.length() - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double tube_iou(const TrackOutput& pred, const Scenario& gt) {
  if (!pred.interval || !gt.gt_interval) return 0.0;
  const int lo = std::min(pred.interval->start_frame, gt.gt_interval->start_frame);
  const int hi = std::max(pred.interval->end_frame, gt.gt_interval->end_frame);
  double sum = 0.0;
  for (int f = lo; f <= hi; ++f) sum += frame_iou(pred, gt, f);
  return sum / static_cast<double>(hi - lo + 1);
}

MetricsReport2D eval_2d(const TrackOutput& pred, const Scenario& gt) {
  MetricsReport2D r;
  if (!pred.interval || !gt.gt_interval) return r;
  r.temporal_iou = temporal_iou(*pred.interval, *gt.gt_interval);
  r.spatiotemporal_iou = tube_iou(pred, gt);
  r.tAP25 = r.temporal_iou >= 0.25 ? 1.0 : 0.0;
  r.stAP25 = r.spatiotemporal_iou >= 0.25 ? 1.0 : 0.0;

  int recovered = 0;
  for (int f = gt.gt_interval->start_frame; f <= gt.gt_interval->end_frame; ++f) {
    if (frame_iou(pred, gt, f) >= 0.5) ++recovered;
  }
  r.recovery_pct = 100.0 * recovered / gt.gt_interval->length();

  bool hit = false;
  for (int f = pred.interval->start_frame; f <= pred.interval->end_frame && !hit; ++f) {
    const auto p = predicted_box(pred, f);
    if (!p || f < 0 || static_cast<std::size_t>(f) >= gt.gt_boxes.size()) continue;
    const auto& g = gt.gt_boxes[static_cast<std::size_t>(f)];
    hit = g && box_iou(*p, *g) >= 0.05;
  }
  r.success_pct = hit ? 100.0 : 0.0;
  return r;
}

double vector_angle(const Eigen::Vector3d& a, const Eigen::Vector3d& b) {
  return std::atan2(a.cross(b).norm(), a.dot(b));
}

MetricsReport3D eval_3d(const TrackOutput& pred, const Scenario& gt, const Thresholds3D& th) {
  if (!gt.has_geometry() || !gt.gt_point || !gt.gt_alignment) {
    throw ParameterError("eval_3d: scenario has no 3D ground truth");
  }
  MetricsReport3D r;
  if (pred.interval) {
    int valid = 0;
    for (int f = pred.interval->start_frame; f <= pred.interval->end_frame; ++f) {
      if (f >= 0 && static_cast<std::size_t>(f) < gt.cameras.size() && gt.cameras[static_cast<std::size_t>(f)].pose_valid) {
        ++valid;
      }
    }
    r.qwp_pct = 100.0 * valid / pred.interval->length();
  }

  double l2_all = 0.0, ang_all = 0.0, l2_valid = 0.0, ang_valid = 0.0;
  int n_all = 0, n_valid = 0;
  for (const auto& d : pred.displacements) {
    if (d.frame_index < 0 || static_cast<std::size_t>(d.frame_index) >= gt.cameras.size()) continue;
    const Eigen::Vector3d g = gt_displacement(gt, static_cast<std::size_t>(d.frame_index));
    const double l2 = (d.delta - g).norm();
    const double ang = vector_angle(d.delta, g);
    l2_all += l2;
    ang_all += ang;
    ++n_all;
    if (gt.cameras[static_cast<std::size_t>(d.frame_index)].pose_valid) {
      l2_valid += l2;
      ang_valid += ang;
      ++n_valid;
    }
  }
  if (n_all > 0) {
    r.l2 = l2_all / n_all;
    r.angle = ang_all / n_all;
    r.success_pct = (*r.l2 < th.l2 && *r.angle < th.angle) ? 100.0 : 0.0;
  }
  if (n_valid > 0) {
    r.success_star_pct = (l2_valid / n_valid < th.l2 && ang_valid / n_valid < th.angle) ? 100.0 : 0.0;
  }
  return r;
}

}  // namespace eagle::harness
