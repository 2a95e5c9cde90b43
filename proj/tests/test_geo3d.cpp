#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <doctest.h>

#include "check_support.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/errors.hpp"
#include "eagle/geo3d.hpp"

using namespace eagle;

namespace {

CameraFrame simple_camera(double f, double cx, double cy, double depth) {
  CameraFrame c;
  c.intrinsics << f, 0, cx, 0, f, cy, 0, 0, 1;
  c.depth = ScoreMap(20, 30, depth);
  c.depth_uncertainty = ScoreMap(20, 30, 0.0);
  return c;
}

}  // namespace

TEST_CASE("align_sim3") {
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<Eigen::Vector3d> pts;
  for (int i = 0; i < 10; ++i) pts.emplace_back(u(rng), u(rng), u(rng));
  const Sim3Transform id = align_sim3(pts, pts);
  CHECK(std::abs(id.scale - 1.0) < 1e-12);
  CHECK((id.rotation - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(id.translation.cwiseAbs().maxCoeff() < 1e-12);

  const std::vector<Eigen::Vector3d> two(pts.begin(), pts.begin() + 2);
  CHECK_THROWS_AS(align_sim3(two, two), DegenerateError);
  std::vector<Eigen::Vector3d> line;
  for (int i = 0; i < 6; ++i) line.emplace_back(i, 2.0 * i, -i);
  CHECK_THROWS_AS(align_sim3(line, line), DegenerateError);

  // local optimality against random perturbations
  std::normal_distribution<double> noise(0.0, 0.05);
  const Sim3Transform gt = oracle::random_sim3(rng);
  std::vector<Eigen::Vector3d> dst;
  for (const auto& p : pts) dst.push_back(gt.apply(p) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
  const Sim3Transform est = align_sim3(pts, dst);
  const auto residual = [&](const Sim3Transform& t) {
    double s = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) s += (t.apply(pts[i]) - dst[i]).squaredNorm();
    return s;
  };
  const double best = residual(est);
  bool optimal = true;
  for (int i = 0; i < 1000; ++i) {
    Sim3Transform t = est;
    t.scale *= 1.0 + 1e-3 * u(rng);
    t.rotation = Eigen::AngleAxisd(1e-3 * u(rng), Eigen::Vector3d(u(rng), u(rng), u(rng)).normalized()) * t.rotation;
    t.translation += 1e-3 * Eigen::Vector3d(u(rng), u(rng), u(rng));
    optimal &= residual(t) >= best;
  }
  CHECK(optimal);
}

TEST_CASE("backproject") {
  const CameraFrame cam = simple_camera(50.0, 14.0, 9.0, 3.5);
  const Eigen::Vector3d p = backproject(cam, 14, 9, {});
  CHECK((p - Eigen::Vector3d(0, 0, 3.5)).norm() < 1e-15);
  Sim3Transform shift;
  shift.translation = Eigen::Vector3d(1.0, -2.0, 0.5);
  CHECK((backproject(cam, 3, 4, shift) - backproject(cam, 3, 4, {}) - shift.translation).norm() < 1e-14);
  CHECK_THROWS_AS(backproject(cam, 30, 4, {}), InvalidSampleError);
  CameraFrame hole = cam;
  hole.depth.at(4, 3) = 0.0;
  CHECK_THROWS_AS(backproject(hole, 3, 4, {}), InvalidSampleError);
}

TEST_CASE("semantic_confidence") {
  BinaryMask m(2, 2);
  m.set(0, 0, true);
  m.set(1, 0, true);
  CHECK(semantic_confidence(ScoreMap(2, 2, 0.8), m, 0.5) == doctest::Approx(0.8).epsilon(1e-15));
  CHECK(semantic_confidence(ScoreMap(2, 2, 0.8), BinaryMask(2, 2), 0.5) == 0.0);
  CHECK_THROWS_AS(semantic_confidence(ScoreMap(2, 2, 0.8), m, 0.5, SemanticWeights{0.5, 0.5, 0.5}), ParameterError);
}

TEST_CASE("geometric_confidence") {
  CHECK(geometric_confidence(0.0) == 1.0);
  CHECK(geometric_confidence(std::numbers::ln2, 1.0) == doctest::Approx(0.5).epsilon(1e-15));
  double prev = 2.0;
  for (int i = 0; i <= 50; ++i) {
    const double g = geometric_confidence(0.2 * i, 1.5);
    CHECK(g < prev);
    prev = g;
  }
  CHECK_THROWS_AS(geometric_confidence(-0.1), ParameterError);
}

TEST_CASE("aggregate") {
  const std::vector<ViewContribution> one{ViewContribution::make({1, 2, 3}, 0.4, 0.9, 0)};
  CHECK((aggregate(one) - Eigen::Vector3d(1, 2, 3)).norm() < 1e-15);
  const std::vector<ViewContribution> two{ViewContribution::make({0, 0, 0}, 0.5, 1.0, 0),
                                          ViewContribution::make({2, 0, 0}, 0.5, 1.0, 1)};
  CHECK((aggregate(two) - Eigen::Vector3d(1, 0, 0)).norm() < 1e-15);
  const std::vector<ViewContribution> dead{ViewContribution::make({0, 0, 0}, 0.0, 1.0, 0)};
  CHECK_THROWS_AS(aggregate(dead), DegenerateError);
  CHECK_THROWS_AS(aggregate(std::vector<ViewContribution>{}), EmptyInputError);
}

TEST_CASE("relative_displacement") {
  std::mt19937_64 rng(42);
  CameraFrame cam = oracle::random_camera(rng);
  const Sim3Transform align = oracle::random_sim3(rng);
  const Eigen::Vector3d centre = align.apply(cam.pose.topRightCorner<3, 1>());
  CHECK(relative_displacement(cam, centre, align).norm() < 1e-9);
  const CameraFrame plain = simple_camera(40.0, 10.0, 10.0, 2.0);
  const Eigen::Vector3d w(0.3, -1.2, 4.0);
  CHECK((relative_displacement(plain, w, {}) - w).norm() < 1e-15);
}

TEST_CASE("derived geo3d checks") { run_derived("geo3d."); }
