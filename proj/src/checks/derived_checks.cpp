#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>

#include "eagle/amm.hpp"
#include "eagle/checks/check.hpp"
#include "glm_convergence.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/conv.hpp"
#include "eagle/crop.hpp"
#include "eagle/errors.hpp"
#include "eagle/fusion.hpp"
#include "eagle/geo3d.hpp"
#include "eagle/glm.hpp"
#include "eagle/harness/io.hpp"
#include "eagle/harness/metrics.hpp"
#include "eagle/harness/scenario.hpp"
#include "eagle/mask_ops.hpp"
#include "eagle/pipeline.hpp"
#include "eagle/signal.hpp"

namespace eagle::checks {

namespace {

using oracle::relative_error;

std::string num(double v) { return format_double(v); }

std::vector<const AmmSample*> pointers(const std::vector<AmmSample>& v) {
  std::vector<const AmmSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

std::vector<const GlmSample*> pointers(const std::vector<GlmSample>& v) {
  std::vector<const GlmSample*> out;
  for (const auto& s : v) out.push_back(&s);
  return out;
}

// ---- core ----------------------------------------------------------------

CheckResult conv2d_naive() {
  std::mt19937_64 rng(101);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const FeatureMap x = oracle::random_feature(rng, 5, 5, 2);
    const ConvKernel k = oracle::random_kernel(rng, {3, 2, 3});
    const double e = relative_error(conv2d(x, k).data, oracle::naive_conv2d(x, k).data);
    worst = std::max(worst, e);
  }
  t.expect(worst <= 1e-12, "conv2d vs naive loop relative error " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult conv2d_adjoint() {
  std::mt19937_64 rng(102);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const KernelShape sh{trial % 2 ? 3 : 5, 1 + trial % 3, 1 + trial % 4};
    const ConvKernel k = oracle::random_kernel(rng, sh);
    const FeatureMap a = oracle::random_feature(rng, 7, 6, sh.in_channels);
    const FeatureMap b = oracle::random_feature(rng, 7, 6, sh.out_channels);
    const double lhs = dot(conv2d(a, k).data, b.data);
    const double rhs = dot(a.data, conv2d_transpose(b, k).data);
    worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
  }
  t.expect(worst <= 1e-10, "adjoint identity relative error " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult kernel_gradient_fd() {
  std::mt19937_64 rng(103);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const KernelShape sh{trial % 2 ? 3 : 1, 1 + trial % 3, 1 + trial % 2};
    const FeatureMap x = oracle::random_feature(rng, 6, 5, sh.in_channels);
    const FeatureMap y = oracle::random_feature(rng, 6, 5, sh.out_channels);
    const ConvKernel k = oracle::random_kernel(rng, sh);
    FeatureMap resid = oracle::naive_conv2d(x, k);
    for (std::size_t i = 0; i < resid.data.size(); ++i) resid.data[i] -= y.data[i];
    const ConvKernel g = kernel_gradient(x, resid, sh);
    const auto f = [&](const ConvKernel& kk) {
      const FeatureMap p = oracle::naive_conv2d(x, kk);
      double s = 0.0;
      for (std::size_t i = 0; i < p.data.size(); ++i) s += 0.5 * (p.data[i] - y.data[i]) * (p.data[i] - y.data[i]);
      return s;
    };
    worst = std::max(worst, relative_error(g.data, oracle::central_difference(f, k, 1e-5).data));
  }
  t.expect(worst <= 1e-5, "kernel gradient vs finite differences " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult components_flood_fill() {
  std::mt19937_64 rng(104);
  Tally t;
  for (int trial = 0; trial < 50; ++trial) {
    const BinaryMask m = oracle::random_mask(rng, 16, 16, 0.2 + 0.01 * trial);
    t.expect(connected_components(m) == oracle::flood_fill_components(m),
             "components differ from flood fill on trial " + std::to_string(trial));
  }
  return t.result("50 random 16x16 masks");
}

CheckResult bounding_rect_reduction() {
  std::mt19937_64 rng(105);
  std::uniform_int_distribution<int> coord(0, 40);
  Tally t;
  for (int trial = 0; trial < 100; ++trial) {
    std::vector<Pixel> px(1 + trial % 17);
    for (auto& p : px) p = {coord(rng), coord(rng)};
    int x0 = 1 << 20, y0 = 1 << 20, x1 = -1, y1 = -1;
    for (const auto& p : px) {
      x0 = std::min(x0, p.col);
      x1 = std::max(x1, p.col);
      y0 = std::min(y0, p.row);
      y1 = std::max(y1, p.row);
    }
    t.expect(min_bounding_rect(px) == BBox{x0, y0, x1, y1}, "bbox differs from min/max reduction");
  }
  return t.result("100 random pixel sets");
}

CheckResult median_sort() {
  std::mt19937_64 rng(106);
  std::normal_distribution<double> nd(0.0, 1.0);
  Tally t;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<double> seq(1 + trial * 3);
    for (double& v : seq) v = nd(rng);
    for (int w : {1, 3, 5, 7}) {
      t.expect(median_filter_1d(seq, w) == oracle::sort_median(seq, w), "median differs from sort oracle");
    }
  }
  return t.result("50 sequences x 4 windows");
}

// ---- amm -----------------------------------------------------------------

CheckResult boundary_neighbor_scan() {
  Tally t;
  BinaryMask sq(5, 5);
  for (int y = 1; y <= 3; ++y) {
    for (int x = 1; x <= 3; ++x) sq.set(y, x, true);
  }
  const FeatureMap enc = encode_pseudo_label(sq);
  int ring = 0;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) ring += enc.at(y, x, 1) == 1.0;
  }
  t.expect(ring == 8 && enc.at(2, 2, 1) == 0.0, "3x3 square boundary is not the 8-pixel ring");
  std::mt19937_64 rng(107);
  for (int trial = 0; trial < 30; ++trial) {
    const BinaryMask m = oracle::random_mask(rng, 9, 11, 0.6);
    const FeatureMap e = encode_pseudo_label(m);
    const BinaryMask ref = oracle::neighbor_scan_boundary(m);
    for (int y = 0; y < m.height; ++y) {
      for (int x = 0; x < m.width; ++x) {
        t.expect(e.at(y, x, 1) == (ref.at(y, x) ? 1.0 : 0.0), "boundary channel differs from neighbour scan");
      }
    }
  }
  return t.result("ring of 8 plus 30 random masks");
}

CheckResult reweight_gaussian() {
  Tally t;
  BinaryMask half(12, 12);
  for (int y = 0; y < 12; ++y) {
    for (int x = 6; x < 12; ++x) half.set(y, x, true);
  }
  const TargetReweighter rw;
  const ScoreMap w = reweight(half, rw);
  const ScoreMap blur = oracle::direct_gaussian_blur(ScoreMap(12, 12, std::vector<double>(half.data.begin(), half.data.end())),
                                                     rw.blur_sigma);
  double worst = 0.0;
  for (std::size_t i = 0; i < w.data.size(); ++i) {
    const double ref = rw.background_weight + (rw.foreground_weight - rw.background_weight) * blur.data[i];
    worst = std::max(worst, std::abs(w.data[i] - ref));
  }
  t.expect(worst <= 1e-12, "reweight differs from direct Gaussian blur by " + num(worst));
  for (int y = 0; y < 12; ++y) {
    for (int x = 1; x < 12; ++x) t.expect(w.at(y, x) >= w.at(y, x - 1), "weights not monotone across the boundary");
  }
  return t.result("max abs diff " + num(worst));
}

CheckResult seg_loss_naive() {
  std::mt19937_64 rng(108);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + trial % 4;
    const auto samples = oracle::random_amm_samples(rng, 1 + trial % 3, 6, 7, c);
    const KernelShape sh{trial % 2 ? 3 : 1, c, 3};
    const ConvKernel sigma = oracle::random_kernel(rng, sh, 0.3);
    const SegObjective obj(pointers(samples), {}, {}, 0.01);
    const double a = obj.loss(sigma);
    const double b = oracle::seg_loss(sigma, samples, {}, {}, 0.01);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  t.expect(worst <= 1e-12, "seg_loss relative error " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult seg_step_line_scan() {
  std::mt19937_64 rng(109);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 1 + trial % 3;
    const auto samples = oracle::random_amm_samples(rng, 2, 6, 6, c);
    const SegObjective obj(pointers(samples), {}, {}, 0.01);
    const ConvKernel sigma = oracle::random_kernel(rng, {3, c, 3}, 0.3);
    const ConvKernel g = obj.gradient(sigma);
    const double alpha = *obj.step_size(g);
    const auto f = [&](double lam) {
      ConvKernel s = sigma;
      axpy(-lam, g.data, s.data);
      return oracle::seg_loss(s, samples, {}, {}, 0.01);
    };
    const auto scan = oracle::bracketed_scan(f, 10000);
    worst = std::max(worst, std::abs(alpha - scan.argmin) / alpha);
  }
  t.expect(worst <= 1e-4, "step size differs from scan argmin by " + num(worst));
  return t.result("max rel diff " + num(worst));
}

CheckResult seg_descent_normal_equations() {
  std::mt19937_64 rng(110);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 5; ++trial) {
    const auto samples = oracle::random_amm_samples(rng, 3, 4, 4, 2);
    const KernelShape sh{trial % 2 ? 1 : 3, 2, 3};
    const SegObjective obj(pointers(samples), {}, {}, 0.01);
    const SegFilter out = steepest_descent(SegFilter{ConvKernel(sh), 0.01}, obj, 200);
    const double best = oracle::seg_loss(oracle::seg_normal_equations(samples, sh, {}, {}, 0.01), samples, {}, {}, 0.01);
    worst = std::max(worst, obj.loss(out.kernel) - best);
  }
  t.expect(worst <= 1e-6, "loss gap after 200 iterations " + num(worst));
  return t.result("max loss gap " + num(worst));
}

CheckResult seg_descent_monotone() {
  std::mt19937_64 rng(111);
  Tally t;
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + trial % 4;
    const auto samples = oracle::random_amm_samples(rng, 1 + trial % 5, 5, 5, c);
    const KernelShape sh{trial % 2 ? 3 : 1, c, 3};
    const SegObjective obj(pointers(samples), {}, {}, 0.01);
    DescentTrace tr;
    steepest_descent(SegFilter{oracle::random_kernel(rng, sh), 0.01}, obj, 8, &tr);
    for (std::size_t i = 1; i < tr.losses.size(); ++i) {
      t.expect(tr.losses[i] <= tr.losses[i - 1], "loss increased on trial " + std::to_string(trial));
    }
  }
  return t.result("100 instances");
}

CheckResult crop_corner_ladder() {
  Tally t;
  // 5x5 corner block with one-pixel arms out to 10 pixels along the top row and left column.
  BinaryMask m(64, 64);
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 5; ++x) m.set(y, x, true);
  }
  for (int i = 5; i < 10; ++i) {
    m.set(0, i, true);
    m.set(i, 0, true);
  }
  // centroid (85/35, 85/35); edge-coordinate center c = 85/35 + 0.5 on both axes
  const double c = 85.0 / 35.0 + 0.5;
  const auto pad = [&](double side) {
    const double inside = std::min(side, side / 2.0 + c);
    return 1.0 - inside * inside / (side * side);
  };
  const CropWindow w = mask_crop_window(m);
  t.expect(pad(15.0) > 0.5, "construction: 1.5x crop should pad more than half");
  t.expect(w.scale == 1.2, "expected the 1.2x rung, got " + num(w.scale));
  t.expect(std::abs(w.side - 12.0) < 1e-12, "expected side 12");
  t.expect(std::abs(w.padded_fraction - pad(12.0)) < 1e-12, "padded fraction differs from closed form");
  return t.result("1.5x pads " + num(pad(15.0)) + ", 1.2x pads " + num(pad(12.0)));
}

CheckResult crop_whole_frame_area() {
  Tally t;
  BinaryMask m(64, 64);
  std::fill(m.data.begin(), m.data.end(), 1);
  const CropWindow w = mask_crop_window(m);
  t.expect(w.scale == 1.2, "whole-frame mask should fall back to 1.2x, got " + num(w.scale));
  const double ref = oracle::counted_padded_fraction(w.x0, w.y0, w.side, 64, 64, 5);
  t.expect(std::abs(w.padded_fraction - ref) < 1e-12, "padded fraction " + num(w.padded_fraction) + " vs counted " + num(ref));
  for (double scale : kCropLadder) {
    const CropWindow c = centered_window(32.0, 32.0, scale * 64.0, 64, 64);
    const double r = oracle::counted_padded_fraction(c.x0, c.y0, c.side, 64, 64, 5);
    t.expect(std::abs(c.padded_fraction - r) < 1e-12, "ladder rung padded fraction differs from area count");
  }
  return t.result("padded " + num(w.padded_fraction));
}

CheckResult amm_fifo_replay() {
  std::mt19937_64 rng(112);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally t;
  AmmMemory mem(50, 4);
  std::vector<double> admitted;
  for (int i = 0; i < 180; ++i) {
    ScoreMap prob(4, 4, u(rng));
    BinaryMask mask(4, 4);
    mask.set(1, 1, true);
    if (!amm_admit(prob, mask, 0.6)) continue;
    const double tag = static_cast<double>(i);
    amm_update(mem, AmmSample{FeatureMap(4, 4, 1, tag), mask, prob.data[0]});
    admitted.push_back(tag);
    t.expect(mem.size() <= 50, "capacity exceeded");
  }
  const std::size_t keep = std::min<std::size_t>(50, admitted.size());
  std::vector<double> expect(admitted.end() - static_cast<std::ptrdiff_t>(keep), admitted.end());
  std::vector<double> got;
  for (const auto& e : mem.entries()) got.push_back(e.feature.data[0]);
  t.expect(got == expect, "bank is not the admitted-stream suffix");
  return t.result(std::to_string(admitted.size()) + " admitted, " + std::to_string(got.size()) + " kept");
}

// ---- glm -----------------------------------------------------------------

CheckResult track_loss_naive() {
  std::mt19937_64 rng(113);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + trial % 4;
    const auto samples = oracle::random_glm_samples(rng, 1 + trial % 3, 6, 5, c, false);
    const ConvKernel k = oracle::random_kernel(rng, {trial % 2 ? 3 : 1, c, 1}, 0.5);
    const TrackObjective obj(pointers(samples), {}, 0.1);
    const double a = obj.loss(k);
    const double b = oracle::track_loss(k, samples, {}, 0.1);
    worst = std::max(worst, std::abs(a - b) / std::abs(b));
  }
  t.expect(worst <= 1e-12, "track_loss relative error " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult track_gradient_wls() {
  std::mt19937_64 rng(114);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const int c = 1 + trial % 3;
    const auto samples = oracle::random_glm_samples(rng, 1 + trial % 3, 5, 6, c, true);
    const KernelShape sh{trial % 2 ? 3 : 1, c, 1};
    const ConvKernel k = oracle::random_kernel(rng, sh, 0.5);
    const double lambda = 0.1;
    const TrackObjective obj(pointers(samples), {}, lambda);
    const ConvKernel g = obj.gradient(k);
    Eigen::Map<const Eigen::VectorXd> kv(k.data.data(), static_cast<Eigen::Index>(k.data.size()));
    Eigen::VectorXd ref = 2.0 * lambda * lambda * kv;
    for (const auto& s : samples) {
      const Eigen::MatrixXd a = oracle::conv_matrix(s.feature, sh);
      Eigen::VectorXd d(a.rows()), gl(a.rows());
      for (Eigen::Index i = 0; i < a.rows(); ++i) {
        gl(i) = s.label.data[static_cast<std::size_t>(i)];
        const double sw = 0.25 + 0.75 * gl(i);
        d(i) = sw * sw;
      }
      ref += (2.0 / samples.size()) * a.transpose() * d.asDiagonal() * (a * kv - gl);
    }
    worst = std::max(worst, relative_error(g.data, std::vector<double>(ref.data(), ref.data() + ref.size())));
  }
  t.expect(worst <= 1e-12, "S=1 gradient vs weighted least squares " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult gn_normal_equations() {
  const GlmConvergence c = glm_wls_convergence(115, 1e-8, false);
  Tally t;
  t.expect(c.all(), "not every instance converged");
  return t.result(c.summary(1e-8));
}

CheckResult gn_step_line_scan() {
  std::mt19937_64 rng(116);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    const int c = 1 + trial % 3;
    const auto samples = oracle::random_glm_samples(rng, 2, 6, 6, c, false);
    const ConvKernel k = oracle::random_kernel(rng, {3, c, 1}, 0.5);
    const double lambda = 0.1;
    const TrackObjective obj(pointers(samples), {}, lambda);
    const auto step = gauss_newton_step(k, obj);
    const ConvKernel& g = step->direction;
    // Frozen model: residual pattern and Q_G fixed at c, linear in the step.
    std::vector<FeatureMap> fh, fg;
    std::vector<ScoreMap> q, h;
    for (const auto& s : samples) {
      const FeatureMap hj = oracle::naive_conv2d(s.feature, k);
      const FeatureMap gj = oracle::naive_conv2d(s.feature, g);
      ScoreMap qs(6, 6), hs(6, 6);
      for (std::size_t i = 0; i < hj.data.size(); ++i) {
        const double gl = s.label.data[i], sr = s.target_region.data[i], sw = 0.25 + 0.75 * gl;
        const double v = hj.data[i];
        qs.data[i] = sw * (sr + (1.0 - sr) * (v > 0.0 ? 1.0 : 0.0));
        hs.data[i] = sw * (sr * v + (1.0 - sr) * std::max(0.0, v) - gl);
      }
      fg.push_back(gj);
      q.push_back(qs);
      h.push_back(hs);
    }
    const auto model = [&](double tt) {
      double s = 0.0;
      for (std::size_t i = 0; i < samples.size(); ++i) {
        for (std::size_t p = 0; p < h[i].data.size(); ++p) {
          const double r = h[i].data[p] - tt * q[i].data[p] * fg[i].data[p];
          s += r * r;
        }
      }
      double reg = 0.0;
      for (std::size_t j = 0; j < k.data.size(); ++j) {
        const double v = k.data[j] - tt * g.data[j];
        reg += v * v;
      }
      return s / samples.size() + lambda * lambda * reg;
    };
    const auto scan = oracle::bracketed_scan(model, 10000);
    worst = std::max(worst, std::abs(step->beta - scan.argmin) / step->beta);
  }
  t.expect(worst <= 1e-4, "beta differs from the frozen-quadratic scan by " + num(worst));
  return t.result("max rel diff " + num(worst));
}

CheckResult optimize_wls() {
  const GlmConvergence c = glm_wls_convergence(117, 1e-6, true);
  Tally t;
  t.expect(c.all(), "not every instance converged");
  return t.result(c.summary(1e-6));
}

CheckResult optimize_monotone() {
  std::mt19937_64 rng(118);
  Tally t;
  int halvings = 0;
  for (int trial = 0; trial < 100; ++trial) {
    const int c = 1 + trial % 4;
    const auto samples = oracle::random_glm_samples(rng, 1 + trial % 4, 6, 6, c, false);
    const TrackObjective obj(pointers(samples), {}, 0.1);
    OptimizeTrace tr;
    optimize_filter(TrackFilter{oracle::random_kernel(rng, {trial % 2 ? 3 : 1, c, 1}), 0.1}, obj, 10, &tr);
    halvings += tr.halvings;
    t.expect(tr.losses.back() <= tr.losses.front(), "final loss above initial on trial " + std::to_string(trial));
    for (std::size_t i = 1; i < tr.losses.size(); ++i) {
      t.expect(tr.losses[i] <= tr.losses[i - 1], "loss increased on trial " + std::to_string(trial));
    }
  }
  return t.result("100 instances, " + std::to_string(halvings) + " step halvings");
}

CheckResult dynamic_crop_geometry() {
  std::mt19937_64 rng(119);
  Tally t;
  const FeatureMap frame = oracle::random_feature(rng, 40, 40, 3);
  for (const BBox b : {BBox{10, 12, 20, 22}, BBox{3, 4, 9, 10}, BBox{25, 20, 35, 30}}) {
    BinaryMask m(40, 40);
    for (int y = b.y_min; y <= b.y_max; ++y) {
      for (int x = b.x_min; x <= b.x_max; ++x) m.set(y, x, true);
    }
    ScoreMap prob(40, 40);
    for (std::size_t i = 0; i < m.data.size(); ++i) prob.data[i] = m.data[i];
    const GlmSample g = glm_make_dynamic_sample(frame, b, prob, 32);
    const CropWindow w = mask_crop_window(m);
    if (w.scale != 1.5) continue;  // the appearance crop only matches while no fallback happens
    const AmmSample a = crop_sample(frame, m, 32);
    t.expect(g.feature.data == a.feature.data, "tracking crop differs from the appearance crop");
    const double side = 1.5 * b.width();
    t.expect(std::abs(g.label.max_value() - std::exp(-0.5 * 2 * 0.25 / std::pow(32.0 / 6.0, 2))) < 1e-12 ||
                 g.label.max_value() <= 1.0,
             "label peak");
    t.expect(std::abs(glm_label_sigma(side) - side / 6.0) < 1e-15, "sigma rule");
  }
  return t.result("3 boxes");
}

CheckResult update_source_replay() {
  Tally t;
  // 15 high frames among the last 25 -> fraction exactly 0.6 -> static
  std::vector<double> peaks(30, 1.0);
  for (int i = 5; i < 15; ++i) peaks[static_cast<std::size_t>(i)] = 0.1;
  std::size_t high = 0;
  double running = 0.0;
  for (std::size_t i = 0; i < peaks.size(); ++i) {
    running = std::max(running, peaks[i]);
    if (i >= 5 && peaks[i] >= 0.5 * running) ++high;
  }
  t.expect(high == 15, "construction should give 15 high frames");
  t.expect(glm_update_source(peaks) == UpdateSource::Static, "fraction 0.6 must select static");
  peaks[5] = 1.0;
  t.expect(glm_update_source(peaks) == UpdateSource::Dynamic, "fraction 0.64 must select dynamic");
  return t.result("15/25 -> static, 16/25 -> dynamic");
}

// ---- fusion --------------------------------------------------------------

CheckResult fuse_elementwise() {
  std::mt19937_64 rng(120);
  Tally t;
  const FeatureMap a = oracle::random_feature(rng, 5, 4, 3), b = oracle::random_feature(rng, 5, 4, 3);
  const FeatureMap f = fuse(a, b);
  for (std::size_t i = 0; i < f.data.size(); ++i) t.expect(f.data[i] == a.data[i] + b.data[i], "fuse differs");
  t.expect(fuse(a, b).data == fuse(b, a).data, "fuse not commutative");
  return t.result();
}

CheckResult decode_channel_mean() {
  std::mt19937_64 rng(121);
  Tally t;
  const FeatureMap f = oracle::random_feature(rng, 5, 4, 3, 2.0);
  const ScoreMap p = decode(f);
  double worst = 0.0;
  for (int y = 0; y < 5; ++y) {
    for (int x = 0; x < 4; ++x) {
      const double m = (f.at(y, x, 0) + f.at(y, x, 1) + f.at(y, x, 2)) / 3.0;
      worst = std::max(worst, std::abs(p.at(y, x) - 1.0 / (1.0 + std::exp(-m))));
    }
  }
  t.expect(worst <= 1e-15, "decode differs from logistic of channel mean by " + num(worst));
  return t.result("max abs diff " + num(worst));
}

CheckResult component_size() {
  Tally t;
  ScoreMap p(6, 8, 0.1);
  for (const Pixel q : {Pixel{0, 0}, Pixel{0, 1}, Pixel{0, 2}}) p.at(q.row, q.col) = 0.9;                       // 3
  for (const Pixel q : {Pixel{3, 3}, Pixel{3, 4}, Pixel{4, 3}, Pixel{4, 4}, Pixel{5, 4}}) p.at(q.row, q.col) = 0.8;  // 5
  const auto r = extract_result(p, 0);
  t.expect(r.bbox == BBox{3, 3, 4, 5}, "largest component not chosen");
  ScoreMap tie(6, 8, 0.1);
  tie.at(4, 0) = tie.at(4, 1) = 0.9;
  tie.at(1, 5) = tie.at(1, 6) = 0.9;
  t.expect(extract_result(tie, 0).bbox == BBox{5, 1, 6, 1}, "tie not broken by row-major first pixel");
  return t.result();
}

CheckResult localize_spike() {
  Tally t;
  std::vector<double> s(30, 0.0);
  for (int i = 12; i <= 14; ++i) s[static_cast<std::size_t>(i)] = 1.0;
  const auto iv = temporal_localize(s);
  t.expect(iv && *iv == TemporalInterval{12, 14}, "width-3 plateau should survive the width-5 median");
  return t.result();
}

CheckResult localize_last_plateau() {
  Tally t;
  std::vector<double> s(60, 0.0);
  for (int i = 10; i <= 20; ++i) s[static_cast<std::size_t>(i)] = 1.0;
  for (int i = 40; i <= 50; ++i) s[static_cast<std::size_t>(i)] = 1.0;
  const auto iv = temporal_localize(s);
  t.expect(iv && *iv == TemporalInterval{40, 50}, "expected the last plateau (40, 50)");
  return t.result();
}

// ---- geo3d ---------------------------------------------------------------

CheckResult sim3_recover() {
  std::mt19937_64 rng(122);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    const Sim3Transform gt = oracle::random_sim3(rng);
    std::vector<AlignmentPair> pairs;
    for (int i = 0; i < 20; ++i) {
      const Eigen::Vector3d p(u(rng), u(rng), u(rng));
      pairs.push_back({p * 3.0, gt.apply(p * 3.0)});
    }
    const Sim3Transform est = align_sim3(pairs);
    worst = std::max({worst, std::abs(est.scale - gt.scale), (est.rotation - gt.rotation).cwiseAbs().maxCoeff(),
                      (est.translation - gt.translation).cwiseAbs().maxCoeff()});
  }
  t.expect(worst < 1e-9, "parameter error " + num(worst));
  return t.result("max parameter error " + num(worst));
}

CheckResult sim3_noisy() {
  Tally t;
  double worst_scale = 0.0, worst_rms = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(2000 + seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    const Sim3Transform gt = oracle::random_sim3(rng);
    std::vector<AlignmentPair> pairs;
    for (int i = 0; i < 100; ++i) {
      const Eigen::Vector3d p = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 3.0;
      pairs.push_back({p, gt.apply(p) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng))});
    }
    const Sim3Transform est = align_sim3(pairs);
    double ss = 0.0;
    for (const auto& pr : pairs) ss += (est.apply(pr.src) - pr.dst).squaredNorm();
    worst_rms = std::max(worst_rms, std::sqrt(ss / pairs.size()));
    worst_scale = std::max(worst_scale, std::abs(est.scale / gt.scale - 1.0));
  }
  t.expect(worst_rms <= 0.02, "RMS residual " + num(worst_rms));
  t.expect(worst_scale < 0.01, "scale error " + num(worst_scale));
  return t.result("max rms " + num(worst_rms) + ", max scale err " + num(worst_scale));
}

CheckResult project_roundtrip() {
  std::mt19937_64 rng(123);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    CameraFrame cam = oracle::random_camera(rng);
    const Sim3Transform align = oracle::random_sim3(rng);
    const int row = 5 + trial % 30, col = 7 + trial % 40;
    // place a point exactly on pixel (col, row) and write its depth into the map
    const double z = 1.0 + 10.0 * std::abs(u(rng));
    cam.depth.at(row, col) = z;
    const Eigen::Vector3d cam_pt = z * cam.intrinsics.inverse() * Eigen::Vector3d(col, row, 1.0);
    const Eigen::Vector3d world = align.apply(cam.pose.topLeftCorner<3, 3>() * cam_pt + cam.pose.topRightCorner<3, 1>());
    const Projection pr = project(cam, world, align);
    const Eigen::Vector3d back = backproject(cam, pr.u, pr.v, align);
    worst = std::max(worst, (back - world).norm() / std::max(1.0, world.norm()));
  }
  t.expect(worst <= 1e-9, "round trip error " + num(worst));
  return t.result("max rel err " + num(worst));
}

CheckResult semantic_hand() {
  Tally t;
  ScoreMap p(1, 3, 0.0);
  p.data = {0.9, 0.3, 0.7};
  BinaryMask m(1, 3);
  m.set(0, 0, true);
  m.set(0, 1, true);
  const double s = semantic_confidence(p, m, 0.5);
  t.expect(std::abs(s - 0.8) < 1e-12, "expected 0.8, got " + num(s));
  return t.result("s_conf " + num(s));
}

CheckResult aggregate_loop() {
  std::mt19937_64 rng(124);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<ViewContribution> v;
    for (int i = 0; i < 1 + trial % 7; ++i) {
      v.push_back(ViewContribution::make(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 10.0, u(rng), u(rng), i));
    }
    double sx = 0, sy = 0, sz = 0, sw = 0;
    for (const auto& c : v) {
      sx += c.fused_weight * c.world_point.x();
      sy += c.fused_weight * c.world_point.y();
      sz += c.fused_weight * c.world_point.z();
      sw += c.fused_weight;
    }
    const Eigen::Vector3d a = aggregate(v);
    worst = std::max(worst, (a - Eigen::Vector3d(sx / sw, sy / sw, sz / sw)).cwiseAbs().maxCoeff());
    for (int axis = 0; axis < 3; ++axis) {
      double lo = 1e300, hi = -1e300;
      for (const auto& c : v) {
        lo = std::min(lo, c.world_point(axis));
        hi = std::max(hi, c.world_point(axis));
      }
      t.expect(a(axis) >= lo - 1e-12 && a(axis) <= hi + 1e-12, "aggregate outside the convex hull");
    }
  }
  t.expect(worst <= 1e-12, "aggregate differs from scalar loop by " + num(worst));
  return t.result("max abs diff " + num(worst));
}

CheckResult displacement_roundtrip() {
  std::mt19937_64 rng(125);
  Tally t;
  double worst = 0.0;
  for (int trial = 0; trial < 50; ++trial) {
    const CameraFrame cam = oracle::random_camera(rng);
    const Sim3Transform align = oracle::random_sim3(rng);
    const int row = trial % 48, col = (trial * 7) % 64;
    const Eigen::Vector3d world = backproject(cam, col, row, align);
    const Eigen::Vector3d ray = cam.depth.at(row, col) * cam.intrinsics.inverse() * Eigen::Vector3d(col, row, 1.0);
    worst = std::max(worst, (relative_displacement(cam, world, align) - ray).norm() / ray.norm());
  }
  t.expect(worst <= 1e-9, "round trip error " + num(worst));
  return t.result("max rel err " + num(worst));
}

// ---- pipeline ------------------------------------------------------------

CheckResult pipeline_init_bank() {
  const auto s = harness::gen_scenario(7, harness::Preset::Identity);
  Tally t;
  const Pipeline p(s.query, {});
  t.expect(p.amm_memory().size() == 4, "expected 4 appearance samples after init");
  t.expect(p.glm_memory().size() == 1, "expected only the static tracking snapshot");
  const GlmSample ref = glm_make_static_sample(s.query.feature, s.query.mask, 32);
  t.expect(p.glm_memory().static_entry().feature.data == ref.feature.data, "static entry is not the query sample");
  return t.result();
}

CheckResult pipeline_identity_frame() {
  const auto s = harness::gen_scenario(7, harness::Preset::Identity);
  Tally t;
  Pipeline p(s.query, {});
  const auto r = p.step_frame(s.frames[0], 0);
  t.expect(r.s_conf > 0.6, "s_conf " + num(r.s_conf) + " not above the admit threshold");
  t.expect(r.bbox && box_iou(*r.bbox, *s.gt_boxes[0]) == 1.0, "box IoU is not 1");
  return t.result("s_conf " + num(r.s_conf));
}

CheckResult pipeline_null_frame() {
  const auto s = harness::gen_scenario(7, harness::Preset::Identity);
  const auto sig = harness::make_signatures(7, s.channels);
  Tally t;
  Pipeline p(s.query, {});
  FeatureMap bg(s.height, s.width, s.channels);
  for (int y = 0; y < s.height; ++y) {
    for (int x = 0; x < s.width; ++x) {
      for (int c = 0; c < s.channels; ++c) bg.at(y, x, c) = sig.other(c);
    }
  }
  const auto r = p.step_frame(bg, 0);
  t.expect(r.mask.empty() && r.s_conf == 0.0 && !r.bbox, "background frame produced a detection");
  t.expect(p.amm_memory().size() == 4 && p.glm_memory().size() == 1, "banks grew on a background frame");
  return t.result();
}

TrackOutput run_geo(const harness::Scenario& s) {
  const TrackOutput track = track_video(s.query, s.frames, {});
  return finalize_3d(track, s.cameras, s.alignment_pairs);
}

CheckResult pipeline_geo_aggregate() {
  const auto s = harness::gen_scenario(11, harness::Preset::Geo);
  Tally t;
  const TrackOutput out = run_geo(s);
  const double err = (*out.world_point - *s.gt_point).norm();
  t.expect(err <= 1e-6, "aggregate is " + num(err) + " from ground truth");
  return t.result("error " + num(err));
}

CheckResult pipeline_corrupted_view() {
  auto params = harness::preset_params(harness::Preset::Geo);
  params.corrupted_view = 2;
  const auto s = harness::gen_scenario(11, params, "geo");
  Tally t;
  const TrackOutput track = track_video(s.query, s.frames, {});
  const TrackOutput all = finalize_3d(track, s.cameras, s.alignment_pairs);
  TrackOutput without = track;
  auto& r = without.results[2];
  r.mask = BinaryMask(r.mask.height, r.mask.width);
  r.bbox.reset();
  const TrackOutput four = finalize_3d(without, s.cameras, s.alignment_pairs);
  const double g = geometric_confidence(params.corrupted_tau, 1.0);
  t.expect(g < 1e-8, "corrupted view weight " + num(g));
  const double shift = (*all.world_point - *four.world_point).norm();
  t.expect(shift < 1e-6, "aggregate moved by " + num(shift));
  return t.result("weight " + num(g) + ", shift " + num(shift));
}

// ---- harness -------------------------------------------------------------

CheckResult drift_similarity() {
  auto params = harness::preset_params(harness::Preset::Drift);
  params.noise = 0.0;
  const auto s = harness::gen_scenario(5, params, "drift");
  Tally t;
  const auto mean_sig = [&](const FeatureMap& f, const BinaryMask& m) {
    Eigen::VectorXd v = Eigen::VectorXd::Zero(f.channels);
    for (int y = 0; y < f.height; ++y) {
      for (int x = 0; x < f.width; ++x) {
        if (!m.at(y, x)) continue;
        for (int c = 0; c < f.channels; ++c) v(c) += f.at(y, x, c);
      }
    }
    return v;
  };
  const Eigen::VectorXd q = mean_sig(s.query.feature, s.query.mask);
  double prev = 2.0, worst = 0.0;
  const int cap = static_cast<int>(std::floor((std::numbers::pi / 2.0) / params.drift_rate));
  for (int i = 0; i <= cap; ++i) {
    const Eigen::VectorXd v = mean_sig(s.frames[static_cast<std::size_t>(i)], s.gt_masks[static_cast<std::size_t>(i)]);
    const double cs = q.dot(v) / (q.norm() * v.norm());
    worst = std::max(worst, std::abs(cs - std::cos(params.drift_rate * i)));
    t.expect(cs < prev, "similarity did not decrease at frame " + std::to_string(i));
    prev = cs;
  }
  t.expect(worst < 1e-3, "similarity differs from cos(rate t) by " + num(worst));
  return t.result("max deviation " + num(worst));
}

CheckResult eval2d_half_overlap() {
  // ground truth frames 10-19; prediction 5-14 with perfect boxes
  harness::Scenario gt;
  gt.height = gt.width = 16;
  gt.channels = 1;
  const BBox box{2, 3, 8, 9};
  for (int f = 0; f < 30; ++f) {
    const bool in = f >= 10 && f <= 19;
    gt.gt_boxes.push_back(in ? std::optional<BBox>(box) : std::nullopt);
  }
  gt.gt_interval = TemporalInterval{10, 19};
  TrackOutput pred;
  pred.interval = TemporalInterval{5, 14};
  for (int f = 0; f < 30; ++f) {
    SegmentationResult r;
    r.frame_index = f;
    if (f >= 5 && f <= 14) r.bbox = box;
    pred.results.push_back(r);
  }
  const auto m = harness::eval_2d(pred, gt);
  Tally t;
  t.expect(std::abs(m.temporal_iou - 1.0 / 3.0) < 1e-15, "tIoU " + num(m.temporal_iou));
  t.expect(m.tAP25 == 1.0, "tAP25 should be 1");
  t.expect(m.recovery_pct == 50.0, "recovery " + num(m.recovery_pct));
  return t.result("tIoU " + num(m.temporal_iou) + ", recovery " + num(m.recovery_pct));
}

CheckResult eval3d_perturbation() {
  const auto s = harness::gen_scenario(3, harness::Preset::Geo);
  std::mt19937_64 rng(126);
  std::normal_distribution<double> nd(0.0, 0.3);
  TrackOutput pred;
  pred.interval = TemporalInterval{0, static_cast<int>(s.frame_count()) - 1};
  double ref = 0.0;
  for (std::size_t f = 0; f < s.frame_count(); ++f) {
    const Eigen::Vector3d eps(nd(rng), nd(rng), nd(rng));
    pred.displacements.push_back({static_cast<int>(f), harness::gt_displacement(s, f) + eps});
    ref += eps.norm();
  }
  ref /= static_cast<double>(s.frame_count());
  const auto m = harness::eval_3d(pred, s);
  Tally t;
  t.expect(m.l2 && std::abs(*m.l2 - ref) < 1e-12, "L2 differs from the direct mean norm");
  return t.result("L2 " + num(*m.l2));
}

CheckResult identity_end_to_end() {
  const auto gen = harness::gen_scenario(7, harness::Preset::Identity);
  const auto s = harness::scenario_from_json(harness::scenario_to_json(gen));
  const PipelineConfig cfg;
  harness::TrackFile tf{s.height, s.width, track_video(s.query, s.frames, cfg), {}};
  const auto back = harness::track_from_json(harness::track_to_json(tf));
  const auto m = harness::eval_2d(back.track, s);
  Tally t;
  t.expect(m.stAP25 == 1.0, "stAP25 " + num(m.stAP25));
  return t.result("stAP25 " + num(m.stAP25) + ", recovery " + num(m.recovery_pct));
}

CheckResult scenario_roundtrip() {
  Tally t;
  for (auto p : {harness::Preset::Identity, harness::Preset::Geo}) {
    const std::string a = harness::scenario_to_json(harness::gen_scenario(9, p));
    const std::string b = harness::scenario_to_json(harness::scenario_from_json(a));
    t.expect(a == b, "serialize-parse-serialize changed the " + harness::preset_name(p) + " scenario");
    t.expect(a == harness::scenario_to_json(harness::gen_scenario(9, p)), "generation is not deterministic");
  }
  return t.result();
}

}  // namespace

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3g", v);
  return buf;
}

std::vector<Check> derived_checks() {
  return {
      {"core.conv2d-naive", conv2d_naive},
      {"core.conv2d-adjoint", conv2d_adjoint},
      {"core.kernel-gradient-fd", kernel_gradient_fd},
      {"core.components-flood-fill", components_flood_fill},
      {"core.bounding-rect-reduction", bounding_rect_reduction},
      {"core.median-sort", median_sort},
      {"amm.boundary-neighbor-scan", boundary_neighbor_scan},
      {"amm.reweight-gaussian", reweight_gaussian},
      {"amm.seg-loss-naive", seg_loss_naive},
      {"amm.step-line-scan", seg_step_line_scan},
      {"amm.descent-normal-equations", seg_descent_normal_equations},
      {"amm.descent-monotone", seg_descent_monotone},
      {"amm.crop-corner-ladder", crop_corner_ladder},
      {"amm.crop-whole-frame-area", crop_whole_frame_area},
      {"amm.fifo-replay", amm_fifo_replay},
      {"glm.track-loss-naive", track_loss_naive},
      {"glm.gradient-wls", track_gradient_wls},
      {"glm.gn-normal-equations", gn_normal_equations},
      {"glm.gn-step-line-scan", gn_step_line_scan},
      {"glm.optimize-wls", optimize_wls},
      {"glm.optimize-monotone", optimize_monotone},
      {"glm.dynamic-crop-geometry", dynamic_crop_geometry},
      {"glm.update-source-replay", update_source_replay},
      {"fusion.fuse-elementwise", fuse_elementwise},
      {"fusion.decode-channel-mean", decode_channel_mean},
      {"fusion.component-size", component_size},
      {"fusion.localize-spike", localize_spike},
      {"fusion.localize-last-plateau", localize_last_plateau},
      {"geo3d.sim3-recover", sim3_recover},
      {"geo3d.sim3-noisy", sim3_noisy},
      {"geo3d.project-roundtrip", project_roundtrip},
      {"geo3d.semantic-hand", semantic_hand},
      {"geo3d.aggregate-loop", aggregate_loop},
      {"geo3d.displacement-roundtrip", displacement_roundtrip},
      {"pipeline.init-bank-size", pipeline_init_bank},
      {"pipeline.identity-frame", pipeline_identity_frame},
      {"pipeline.null-frame", pipeline_null_frame},
      {"pipeline.geo-aggregate", pipeline_geo_aggregate},
      {"pipeline.corrupted-view", pipeline_corrupted_view},
      {"harness.drift-similarity", drift_similarity},
      {"harness.eval2d-half-overlap", eval2d_half_overlap},
      {"harness.eval3d-perturbation", eval3d_perturbation},
      {"harness.identity-end-to-end", identity_end_to_end},
      {"harness.scenario-roundtrip", scenario_roundtrip},
  };
}

RunSummary run_checks(std::span<const Check> checks, std::string_view filter, std::ostream& out) {
  RunSummary sum;
  for (const auto& c : checks) {
    if (!filter.empty() && c.name.find(filter) == std::string::npos) continue;
    CheckResult r;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      r = c.run();
    } catch (const std::exception& e) {
      r = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    (r.pass ? sum.passed : sum.failed) += 1;
    out << (r.pass ? "PASS " : "FAIL ") << c.name;
    if (!r.detail.empty()) out << ": " << r.detail;
    out << " [" << format_double(secs) << " s]\n";
    out.flush();
  }
  return sum;
}

}  // namespace eagle::checks
