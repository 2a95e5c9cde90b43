#include "eagle/geo3d.hpp"

#include <cmath>
#include <vector>

#include <Eigen/Geometry>
#include <Eigen/SVD>

#include "eagle/errors.hpp"

namespace eagle {

namespace {

constexpr double kRotationTol = 1e-9;

bool is_rotation(const Eigen::Matrix3d& r) {
  return (r.transpose() * r - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() <= kRotationTol &&
         std::abs(r.determinant() - 1.0) <= kRotationTol;
}

}  // namespace

void CameraFrame::validate() const {
  if (!is_rotation(pose.topLeftCorner<3, 3>())) throw ParameterError("camera pose rotation is not orthonormal");
  if (pose(3, 0) != 0.0 || pose(3, 1) != 0.0 || pose(3, 2) != 0.0 || pose(3, 3) != 1.0) {
    throw ParameterError("camera pose bottom row must be [0 0 0 1]");
  }
  if (!(intrinsics(0, 0) > 0.0) || !(intrinsics(1, 1) > 0.0)) throw ParameterError("focal lengths must be positive");
  if (intrinsics(1, 0) != 0.0 || intrinsics(2, 0) != 0.0 || intrinsics(2, 1) != 0.0 || intrinsics(2, 2) != 1.0) {
    throw ParameterError("intrinsics must be upper triangular with K(2,2) = 1");
  }
  if (!depth_uncertainty.same_dims(depth.height, depth.width)) {
    throw DimensionError("depth and uncertainty maps differ in size");
  }
  for (double u : depth_uncertainty.data) {
    if (!(u >= 0.0)) throw ParameterError("depth uncertainty must be non-negative");
  }
}

Sim3Transform Sim3Transform::inverse() const {
  Sim3Transform out;
  out.scale = 1.0 / scale;
  out.rotation = rotation.transpose();
  out.translation = -(out.rotation * translation) / scale;
  return out;
}

Sim3Transform Sim3Transform::compose(const Sim3Transform& o) const {
  Sim3Transform out;
  out.scale = scale * o.scale;
  out.rotation = rotation * o.rotation;
  out.translation = scale * (rotation * o.translation) + translation;
  return out;
}

Eigen::Matrix4d Sim3Transform::matrix() const {
  Eigen::Matrix4d m = Eigen::Matrix4d::Identity();
  m.topLeftCorner<3, 3>() = scale * rotation;
  m.topRightCorner<3, 1>() = translation;
  return m;
}

void Sim3Transform::validate() const {
  if (!(scale > 0.0)) throw ParameterError("similarity scale must be positive");
  if (!is_rotation(rotation)) throw ParameterError("similarity rotation is not a proper rotation");
}

Sim3Transform align_sim3(std::span<const Eigen::Vector3d> src, std::span<const Eigen::Vector3d> dst) {
  if (src.size() != dst.size()) throw DimensionError("align_sim3: point sets differ in size");
  const std::size_t n = src.size();
  if (n < 3) throw DegenerateError("align_sim3: need at least 3 point pairs");
  Eigen::Matrix3Xd s(3, n), d(3, n);
  for (std::size_t i = 0; i < n; ++i) {
    s.col(static_cast<Eigen::Index>(i)) = src[i];
    d.col(static_cast<Eigen::Index>(i)) = dst[i];
  }
  const Eigen::Vector3d mean = s.rowwise().mean();
  const Eigen::Matrix3Xd centered = s.colwise() - mean;
  const Eigen::JacobiSVD<Eigen::Matrix3Xd> svd(centered);
  const auto sv = svd.singularValues();
  if (!(sv(0) > 0.0) || sv(1) <= 1e-9 * sv(0)) throw DegenerateError("align_sim3: source points are collinear");

  const Eigen::Matrix4d m = Eigen::umeyama(s, d, true);
  Sim3Transform out;
  const Eigen::Matrix3d sr = m.topLeftCorner<3, 3>();
  out.scale = std::cbrt(sr.determinant());
  out.rotation = sr / out.scale;
  out.translation = m.topRightCorner<3, 1>();
  return out;
}

Sim3Transform align_sim3(std::span<const AlignmentPair> pairs) {
  std::vector<Eigen::Vector3d> s, d;
  s.reserve(pairs.size());
  d.reserve(pairs.size());
  for (const auto& p : pairs) {
    s.push_back(p.src);
    d.push_back(p.dst);
  }
  return align_sim3(s, d);
}

Eigen::Vector3d backproject(const CameraFrame& frame, double u, double v, const Sim3Transform& align) {
  const int col = static_cast<int>(std::lround(u));
  const int row = static_cast<int>(std::lround(v));
  if (row < 0 || col < 0 || row >= frame.depth.height || col >= frame.depth.width) {
    throw InvalidSampleError("backproject: pixel outside the depth map");
  }
  const double z = frame.depth.at(row, col);
  if (!(z > 0.0) || !std::isfinite(z)) throw InvalidSampleError("backproject: invalid depth at pixel");
  const Eigen::Vector3d ray = frame.intrinsics.triangularView<Eigen::Upper>().solve(Eigen::Vector3d(u, v, 1.0));
  const Eigen::Vector3d cam = z * ray;
  const Eigen::Vector3d world = frame.pose.topLeftCorner<3, 3>() * cam + frame.pose.topRightCorner<3, 1>();
  return align.apply(world);
}

Eigen::Vector3d relative_displacement(const CameraFrame& frame, const Eigen::Vector3d& world_point,
                                      const Sim3Transform& align) {
  const Eigen::Vector3d w = align.apply_inverse(world_point);
  const Eigen::Matrix3d r = frame.pose.topLeftCorner<3, 3>();
  return r.transpose() * (w - frame.pose.topRightCorner<3, 1>());
}

Projection project(const CameraFrame& frame, const Eigen::Vector3d& world_point, const Sim3Transform& align) {
  const Eigen::Vector3d cam = relative_displacement(frame, world_point, align);
  if (!(cam.z() > 0.0)) throw InvalidSampleError("project: point is behind the camera");
  const Eigen::Vector3d h = frame.intrinsics * cam;
  return {h.x() / h.z(), h.y() / h.z(), cam.z()};
}

double semantic_confidence(const ScoreMap& prob, const BinaryMask& mask, double threshold, const SemanticWeights& w) {
  if (!mask.same_dims(prob.height, prob.width)) throw DimensionError("semantic_confidence: map sizes differ");
  if (w.phi < 0.0 || w.psi < 0.0 || w.mu < 0.0 || std::abs(w.phi + w.psi + w.mu - 1.0) > 1e-9) {
    throw ParameterError("semantic_confidence: weights must be non-negative and sum to 1");
  }
  double sum = 0.0, above_sum = 0.0, peak = 0.0;
  std::size_t n = 0, above = 0;
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    if (!mask.data[i]) continue;
    const double p = prob.data[i];
    sum += p;
    ++n;
    if (p > threshold) {
      above_sum += p;
      ++above;
    }
    peak = n == 1 ? p : std::max(peak, p);
  }
  if (n == 0) return 0.0;
  const double p_av = sum / static_cast<double>(n);
  const double p_lambda = above > 0 ? above_sum / static_cast<double>(above) : 0.0;
  return w.phi * p_av + w.psi * p_lambda + w.mu * peak;
}

double geometric_confidence(double tau, double zeta) {
  if (!(tau >= 0.0)) throw ParameterError("geometric_confidence: tau must be non-negative");
  if (!(zeta > 0.0)) throw ParameterError("geometric_confidence: zeta must be positive");
  return std::exp(-zeta * tau);
}

Eigen::Vector3d aggregate(std::span<const ViewContribution> contributions) {
  if (contributions.empty()) throw EmptyInputError("aggregate: no contributions");
  Eigen::Vector3d acc = Eigen::Vector3d::Zero();
  double total = 0.0;
  for (const auto& c : contributions) {
    if (!(c.fused_weight >= 0.0)) throw ParameterError("aggregate: fused weights must be non-negative");
    acc += c.fused_weight * c.world_point;
    total += c.fused_weight;
  }
  if (!(total > 0.0)) throw DegenerateError("aggregate: fused weights sum to zero");
  return acc / total;
}

}  // namespace eagle
