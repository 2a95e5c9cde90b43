#pragma once

#include <optional>
#include <span>

#include <Eigen/Core>

#include "eagle/tensor.hpp"

namespace eagle {

/// One video frame's geometry: camera-to-world pose, pinhole intrinsics (pixels),
/// z-depth map in meters and a non-negative depth-uncertainty map.
struct CameraFrame {
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();
  Eigen::Matrix3d intrinsics = Eigen::Matrix3d::Identity();
  ScoreMap depth;
  ScoreMap depth_uncertainty;
  bool pose_valid = true;

  /// Rotation block orthonormal with det 1 (1e-9), positive focal lengths,
  /// upper-triangular intrinsics, depth/uncertainty maps of equal size.
  void validate() const;
};

/// p -> scale * rotation * p + translation.
struct Sim3Transform {
  double scale = 1.0;
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return scale * (rotation * p) + translation; }
  Eigen::Vector3d apply_inverse(const Eigen::Vector3d& p) const {
    return rotation.transpose() * (p - translation) / scale;
  }
  Sim3Transform inverse() const;
  /// (*this) o other
  Sim3Transform compose(const Sim3Transform& other) const;
  Eigen::Matrix4d matrix() const;
  void validate() const;
};

struct AlignmentPair {
  Eigen::Vector3d src;  // reconstruction frame
  Eigen::Vector3d dst;  // benchmark frame
};

/// Least-squares similarity transform taking src onto dst (closed form,
/// reflections excluded). Throws DegenerateError for fewer than three pairs
/// or collinear source points.
Sim3Transform align_sim3(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst);
Sim3Transform align_sim3(std::span<const AlignmentPair> pairs);

/// (T_eta T_i) * depth(u, v) * K^-1 [u, v, 1]^T with nearest-pixel depth lookup.
/// Throws InvalidSampleError when (u, v) is outside the depth map or the depth is not positive.
Eigen::Vector3d backproject(const CameraFrame& frame, double u, double v, const Sim3Transform& align);

/// Forward projection of a benchmark-frame point into pixel (u, v) and its z-depth.
struct Projection {
  double u = 0.0;
  double v = 0.0;
  double depth = 0.0;
};
Projection project(const CameraFrame& frame, const Eigen::Vector3d& world_point, const Sim3Transform& align);

/// (T_eta T_i)^-1 applied to a benchmark-frame point: the point in camera i's coordinates.
Eigen::Vector3d relative_displacement(const CameraFrame& frame, const Eigen::Vector3d& world_point,
                                      const Sim3Transform& align);

struct SemanticWeights {
  double phi = 1.0 / 3.0;  // mean probability
  double psi = 1.0 / 3.0;  // mean probability above the threshold
  double mu = 1.0 / 3.0;   // max probability
};

/// phi * P_av + psi * P_lambda + mu * P_max over the mask. Empty mask gives 0;
/// no pixel strictly above `threshold` gives P_lambda = 0. Weights must be
/// non-negative and sum to one (1e-9).
double semantic_confidence(const ScoreMap& prob, const BinaryMask& mask, double threshold = 0.5,
                           const SemanticWeights& w = {});

/// exp(-zeta * tau); ParameterError for tau < 0 or zeta <= 0.
double geometric_confidence(double tau, double zeta = 1.0);

struct ViewContribution {
  Eigen::Vector3d world_point = Eigen::Vector3d::Zero();
  double s_conf = 0.0;
  double g_conf = 1.0;
  double fused_weight = 0.0;
  int frame_index = 0;

  static ViewContribution make(const Eigen::Vector3d& p, double s_conf, double g_conf, int frame_index) {
    return {p, s_conf, g_conf, s_conf * g_conf, frame_index};
  }
};

/// Fused-weight average of the contributing points. Throws EmptyInputError on
/// no contributions and DegenerateError when the weights sum to zero.
Eigen::Vector3d aggregate(std::span<const ViewContribution> contributions);

}  // namespace eagle
