#include <algorithm>
#include <chrono>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>
#include <Eigen/LU>
#include <tbb/global_control.h>

#include "eagle/amm.hpp"
#include "eagle/checks/check.hpp"
#include "eagle/checks/oracles.hpp"
#include "eagle/conv.hpp"
#include "eagle/errors.hpp"
#include "eagle/geo3d.hpp"
#include "eagle/glm.hpp"
#include "eagle/harness/metrics.hpp"
#include "eagle/harness/runs.hpp"
#include "eagle/harness/scenario.hpp"
#include "eagle/pipeline.hpp"
#include "eagle/signal.hpp"
#include "glm_convergence.hpp"

namespace eagle::checks {

namespace {

using Clock = std::chrono::steady_clock;

std::string num(double v) { return format_double(v); }

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

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

// Instance shapes cycle through K in {1, 3}, C in 1..4 and sizes up to 8x8.
KernelShape instance_shape(int i, int out_channels) { return {i % 2 ? 3 : 1, 1 + i % 4, out_channels}; }
int instance_size(int i) { return 3 + i % 6; }

CheckResult gradient_fidelity() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(9001);
  Tally t;
  double seg_worst = 0.0, track_worst = 0.0;
  int seg_n = 0, track_n = 0;
  for (int i = 0; i < 120; ++i) {
    const KernelShape sh = instance_shape(i, 3);
    const int n = instance_size(i);
    const auto samples = oracle::random_amm_samples(rng, 1 + i % 5, n, n, sh.in_channels);
    AmmMemory mem(50, n);
    for (const auto& s : samples) mem.update(s);
    const SegFilter sigma{oracle::random_kernel(rng, sh, 0.5), 0.01};
    const ConvKernel g = seg_gradient(sigma, mem);
    const auto f = [&](const ConvKernel& k) { return oracle::seg_loss(k, samples, {}, {}, 0.01); };
    seg_worst = std::max(seg_worst, oracle::relative_error(g.data, oracle::central_difference(f, sigma.kernel).data));
    ++seg_n;
  }
  int attempts = 0;
  while (track_n < 120 && attempts < 100000) {
    ++attempts;
    const int i = track_n;
    const KernelShape sh = instance_shape(i, 1);
    const int n = instance_size(i);
    const auto samples = oracle::random_glm_samples(rng, 1 + i % 3, n, n, sh.in_channels, false);
    const ConvKernel c = oracle::random_kernel(rng, sh, 0.5);
    double min_abs = 1e300;
    for (const auto& s : samples) {
      for (double v : oracle::naive_conv2d(s.feature, c).data) min_abs = std::min(min_abs, std::abs(v));
    }
    if (min_abs < 0.01) continue;  // keep clear of the hinge kink
    GlmMemory mem(samples[0]);
    for (std::size_t k = 1; k < samples.size(); ++k) mem.push_dynamic(samples[k]);
    const ConvKernel g = track_gradient(TrackFilter{c, 0.1}, mem);
    const auto f = [&](const ConvKernel& k) { return oracle::track_loss(k, samples, {}, 0.1); };
    track_worst = std::max(track_worst, oracle::relative_error(g.data, oracle::central_difference(f, c).data));
    ++track_n;
  }
  const double secs = seconds_since(t0);
  t.expect(seg_n >= 100 && track_n >= 100, "too few instances generated");
  t.expect(seg_worst <= 1e-5, "seg gradient relative error " + num(seg_worst));
  t.expect(track_worst <= 1e-5, "track gradient relative error " + num(track_worst));
  t.expect(secs < 30.0, "runtime " + num(secs) + " s");
  return t.result(std::to_string(seg_n) + "+" + std::to_string(track_n) + " instances, max rel err seg " +
                  num(seg_worst) + " track " + num(track_worst) + ", " + num(secs) + " s");
}

CheckResult exact_line_search() {
  std::mt19937_64 rng(9002);
  Tally t;
  double worst_excess = -1e300;
  for (int i = 0; i < 50; ++i) {
    const KernelShape sh = instance_shape(i, 3);
    const int n = instance_size(i);
    const auto samples = oracle::random_amm_samples(rng, 1 + i % 3, n, n, sh.in_channels);
    const double delta = 0.01;
    const SegObjective obj(pointers(samples), {}, {}, delta);
    const ConvKernel sigma = oracle::random_kernel(rng, sh, 0.5);
    const ConvKernel g = obj.gradient(sigma);
    const double alpha = *obj.step_size(g);
    const auto f = [&](double lam) {
      ConvKernel s = sigma;
      axpy(-lam, g.data, s.data);
      return oracle::seg_loss(s, samples, {}, {}, delta);
    };
    double hi = 1e-6;
    while (f(hi) <= f(0.0)) hi *= 2.0;
    const auto scan = oracle::line_scan(f, 0.0, hi, 10000);
    const double fa = f(alpha);
    // allow rounding noise of the loss evaluation itself
    const double excess = (fa - scan.min) / std::max(1.0, std::abs(scan.min));
    worst_excess = std::max(worst_excess, excess);
    t.expect(excess <= 1e-13, "alpha loses to a scan point on instance " + std::to_string(i));
  }

  // alpha = 1: one-hot 1x1 features, unit weights, no ridge
  double one_err = 0.0;
  for (int c = 0; c < 4; ++c) {
    AmmSample s{FeatureMap(1, 1, 4, 0.0), BinaryMask(1, 1), 1.0};
    s.feature.data[static_cast<std::size_t>(c)] = 1.0;
    s.mask.set(0, 0, c % 2 == 0);
    const TargetReweighter unit{1.0, 1.0, 1.0};
    const std::vector<AmmSample> v{s};
    const SegObjective obj(pointers(v), {}, unit, 0.0);
    const ConvKernel g = obj.gradient(oracle::random_kernel(rng, {1, 4, 3}));
    one_err = std::max(one_err, std::abs(*obj.step_size(g) - 1.0));
  }
  t.expect(one_err <= 1e-12, "identity-feature alpha off by " + num(one_err));

  // alpha = 1/delta: zero features leave only the ridge
  double ridge_err = 0.0;
  for (double delta : {0.01, 0.5, 3.0}) {
    const std::vector<AmmSample> v{{FeatureMap(6, 6, 2, 0.0), oracle::random_mask(rng, 6, 6), 1.0}};
    const SegObjective obj(pointers(v), {}, {}, delta);
    const ConvKernel g = obj.gradient(oracle::random_kernel(rng, {3, 2, 3}));
    ridge_err = std::max(ridge_err, std::abs(*obj.step_size(g) * delta - 1.0));
  }
  t.expect(ridge_err <= 1e-12, "pure-ridge alpha*delta off by " + num(ridge_err));
  return t.result("50 scans, max excess " + num(worst_excess) + "; alpha=1 err " + num(one_err) +
                  ", alpha=1/delta err " + num(ridge_err));
}

CheckResult convergence() {
  std::mt19937_64 rng(9003);
  Tally t;
  double amm_gap = 0.0;
  bool monotone = true;
  for (int i = 0; i < 20; ++i) {
    const KernelShape sh{i % 2 ? 3 : 1, 1 + i % 2, 3};
    const auto samples = oracle::random_amm_samples(rng, 3, 4, 4, sh.in_channels);
    const SegObjective obj(pointers(samples), {}, {}, 0.01);
    DescentTrace tr;
    const SegFilter out = steepest_descent(SegFilter{ConvKernel(sh), 0.01}, obj, 200, &tr);
    const double best =
        oracle::seg_loss(oracle::seg_normal_equations(samples, sh, {}, {}, 0.01), samples, {}, {}, 0.01);
    amm_gap = std::max(amm_gap, obj.loss(out.kernel) - best);
    for (std::size_t k = 1; k < tr.losses.size(); ++k) monotone &= tr.losses[k] <= tr.losses[k - 1];
  }
  const GlmConvergence glm = glm_wls_convergence(9013, 1e-6, true);
  monotone &= glm.monotone;
  t.expect(amm_gap <= 1e-6, "steepest descent stops " + num(amm_gap) + " above the closed-form minimum");
  t.expect(glm.all(), "GLM optimizer misses the closed-form minimum on some instances");
  t.expect(monotone, "a loss increased between iterations");
  return t.result("AMM max gap " + num(amm_gap) + "; GLM " + glm.summary(1e-6));
}

CheckResult gauss_newton_step_size() {
  std::mt19937_64 rng(9004);
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    const KernelShape sh = instance_shape(i, 1);
    const int n = instance_size(i);
    const auto samples = oracle::random_glm_samples(rng, 1 + i % 3, n, n, sh.in_channels, false);
    const ConvKernel c = oracle::random_kernel(rng, sh, 0.5);
    const double lambda = 0.1;
    const TrackObjective obj(pointers(samples), {}, lambda);
    const auto step = gauss_newton_step(c, obj);
    const ConvKernel& g = step->direction;
    // Residual and its derivative frozen at c, so the model is quadratic in the step.
    std::vector<std::vector<double>> r0(samples.size()), dr(samples.size());
    for (std::size_t s = 0; s < samples.size(); ++s) {
      const FeatureMap hj = oracle::naive_conv2d(samples[s].feature, c);
      const FeatureMap gj = oracle::naive_conv2d(samples[s].feature, g);
      for (std::size_t p = 0; p < hj.data.size(); ++p) {
        const double gl = samples[s].label.data[p], sr = samples[s].target_region.data[p];
        const double sw = 0.25 + 0.75 * gl, v = hj.data[p];
        r0[s].push_back(sw * (sr * v + (1.0 - sr) * std::max(0.0, v) - gl));
        dr[s].push_back(sw * (sr + (1.0 - sr) * (v > 0.0 ? 1.0 : 0.0)) * gj.data[p]);
      }
    }
    const auto model = [&](double b) {
      double sum = 0.0;
      for (std::size_t s = 0; s < samples.size(); ++s) {
        for (std::size_t p = 0; p < r0[s].size(); ++p) sum += std::pow(r0[s][p] - b * dr[s][p], 2);
      }
      double reg = 0.0;
      for (std::size_t j = 0; j < c.data.size(); ++j) reg += std::pow(c.data[j] - b * g.data[j], 2);
      return sum / static_cast<double>(samples.size()) + lambda * lambda * reg;
    };
    const auto scan = oracle::bracketed_scan(model, 10000);
    worst = std::max(worst, std::abs(step->beta - scan.argmin) / step->beta);
  }
  t.expect(worst <= 1e-4, "beta differs from the scan minimizer by " + num(worst));

  double ridge = 0.0;
  for (double lambda : {0.1, 0.3, 2.0}) {
    std::vector<GlmSample> v = oracle::random_glm_samples(rng, 2, 5, 5, 2, false);
    for (auto& s : v) std::fill(s.feature.data.begin(), s.feature.data.end(), 0.0);
    const TrackObjective obj(pointers(v), {}, lambda);
    const auto step = gauss_newton_step(oracle::random_kernel(rng, {3, 2, 1}), obj);
    ridge = std::max(ridge, std::abs(step->beta * 2.0 * lambda * lambda - 1.0));
  }
  t.expect(ridge <= 1e-15, "ridge-only beta*2*lambda^2 off by " + num(ridge));
  return t.result("max rel diff " + num(worst) + ", ridge-only err " + num(ridge));
}

CheckResult sim3_recovery() {
  Tally t;
  double worst = 0.0;
  for (int i = 0; i < 100; ++i) {
    std::mt19937_64 rng(10000 + i);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const Sim3Transform gt = oracle::random_sim3(rng);
    std::vector<Eigen::Vector3d> src, dst;
    for (int k = 0; k < 3 + i % 20; ++k) {
      src.emplace_back(Eigen::Vector3d(u(rng), u(rng), u(rng)) * 5.0);
      dst.push_back(gt.apply(src.back()));
    }
    const Sim3Transform est = align_sim3(src, dst);
    worst = std::max({worst, std::abs(est.scale - gt.scale), (est.rotation - gt.rotation).cwiseAbs().maxCoeff(),
                      (est.translation - gt.translation).cwiseAbs().maxCoeff()});
  }
  t.expect(worst < 1e-9, "noiseless parameter error " + num(worst));
  double scale_err = 0.0;
  for (int seed = 0; seed < 50; ++seed) {
    std::mt19937_64 rng(20000 + seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::normal_distribution<double> noise(0.0, 0.01);
    const Sim3Transform gt = oracle::random_sim3(rng);
    std::vector<Eigen::Vector3d> src, dst;
    for (int k = 0; k < 100; ++k) {
      src.emplace_back(Eigen::Vector3d(u(rng), u(rng), u(rng)));
      dst.push_back(gt.apply(src.back()) + Eigen::Vector3d(noise(rng), noise(rng), noise(rng)));
    }
    scale_err = std::max(scale_err, std::abs(align_sim3(src, dst).scale / gt.scale - 1.0));
  }
  t.expect(scale_err < 0.01, "noisy scale error " + num(scale_err));
  return t.result("noiseless max err " + num(worst) + ", noisy max scale err " + num(scale_err));
}

CheckResult projection_round_trips() {
  std::mt19937_64 rng(9006);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Tally t;
  double pix = 0.0, world = 0.0, disp = 0.0;
  for (int i = 0; i < 100; ++i) {
    CameraFrame cam = oracle::random_camera(rng);
    const Sim3Transform align = oracle::random_sim3(rng);
    const int row = static_cast<int>(u(rng) * 47.999), col = static_cast<int>(u(rng) * 63.999);
    // pixel -> world -> pixel
    const Eigen::Vector3d p = backproject(cam, col, row, align);
    const Projection pr = project(cam, p, align);
    pix = std::max({pix, std::abs(pr.u - col), std::abs(pr.v - row), std::abs(pr.depth - cam.depth.at(row, col))});
    // world -> pixel -> world for a point at a fresh depth along the same pixel ray
    const double z = 0.5 + 20.0 * u(rng);
    const Eigen::Vector3d cam_pt = z * cam.intrinsics.inverse() * Eigen::Vector3d(col, row, 1.0);
    const Eigen::Vector3d w = align.apply(cam.pose.topLeftCorner<3, 3>() * cam_pt + cam.pose.topRightCorner<3, 1>());
    const Projection wp = project(cam, w, align);
    CameraFrame moved = cam;
    moved.depth.at(row, col) = z;
    world = std::max(world, (backproject(moved, wp.u, wp.v, align) - w).norm() / std::max(1.0, w.norm()));
    // displacement is the camera-frame ray of the pixel
    const Eigen::Vector3d ray = cam.depth.at(row, col) * cam.intrinsics.inverse() * Eigen::Vector3d(col, row, 1.0);
    disp = std::max(disp, (relative_displacement(cam, p, align) - ray).norm() / ray.norm());
  }
  t.expect(pix <= 1e-9, "pixel round trip " + num(pix));
  t.expect(world <= 1e-9, "world round trip " + num(world));
  t.expect(disp <= 1e-9, "displacement round trip " + num(disp));
  return t.result("max err pixel " + num(pix) + ", world " + num(world) + ", displacement " + num(disp));
}

bool same_amm(const AmmMemory& a, const AmmMemory& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.entries()[i].feature.data != b.entries()[i].feature.data || a.entries()[i].mask.data != b.entries()[i].mask.data) {
      return false;
    }
  }
  return true;
}

bool same_glm_sample(const GlmSample& a, const GlmSample& b) {
  return a.feature.data == b.feature.data && a.label.data == b.label.data && a.target_region.data == b.target_region.data &&
         a.kind == b.kind;
}

bool same_glm(const GlmMemory& a, const GlmMemory& b) {
  if (a.size() != b.size() || !same_glm_sample(a.static_entry(), b.static_entry())) return false;
  for (std::size_t i = 0; i < a.dynamic_entries().size(); ++i) {
    if (!same_glm_sample(a.dynamic_entries()[i], b.dynamic_entries()[i])) return false;
  }
  return true;
}

CheckResult memory_policy() {
  Tally t;
  const PipelineConfig cfg;

  // Replay a drift run frame by frame against an independently maintained bank.
  const auto drift = harness::gen_scenario(1, harness::Preset::Drift);
  Pipeline p(drift.query, cfg);
  const GlmSample static_copy = p.glm_memory().static_entry();
  std::vector<const AmmSample*> expected;
  for (const auto& e : p.initial_amm_memory().entries()) expected.push_back(&e);
  std::vector<AmmSample> admitted;
  admitted.reserve(drift.frame_count());
  std::size_t max_amm = 0, max_glm = 0;
  int pushes = 0;
  for (std::size_t f = 0; f < drift.frame_count(); ++f) {
    const std::size_t before = p.update_events().size();
    const auto r = p.step_frame(drift.frames[f], static_cast<int>(f));
    const bool admit = r.bbox && r.s_conf >= 0.6 && is_update_frame(static_cast<int>(f), cfg);
    const bool updated = p.update_events().size() > before;
    t.expect(admit == updated || p.halted(), "update at frame " + std::to_string(f) + " disagrees with admission");
    if (updated) {
      admitted.push_back(crop_sample(drift.frames[f], r.mask, cfg.sample_resolution, r.s_conf));
      expected.push_back(&admitted.back());
      if (p.update_events().back().source == UpdateSource::Dynamic) ++pushes;
    }
    const std::size_t n = std::min<std::size_t>(50, expected.size());
    bool fifo = p.amm_memory().size() == n;
    for (std::size_t i = 0; fifo && i < n; ++i) {
      fifo = p.amm_memory().entries()[i].feature.data == expected[expected.size() - n + i]->feature.data;
    }
    t.expect(fifo, "appearance bank is not the FIFO of admitted samples at frame " + std::to_string(f));
    max_amm = std::max(max_amm, p.amm_memory().size());
    max_glm = std::max(max_glm, p.glm_memory().size());
    t.expect(same_glm_sample(p.glm_memory().static_entry(), static_copy), "static snapshot changed");
  }
  t.expect(max_amm <= 50 && max_glm <= 50, "a bank exceeded 50 entries");

  // Static snapshot survives 200 direct dynamic pushes.
  GlmMemory mem(static_copy);
  std::mt19937_64 rng(9007);
  for (int i = 0; i < 200; ++i) {
    auto s = oracle::random_glm_samples(rng, 1, 32, 32, static_copy.feature.channels, false)[0];
    mem.push_dynamic(std::move(s));
    t.expect(mem.size() <= 50, "GLM bank exceeded 50 entries");
  }
  t.expect(same_glm_sample(mem.static_entry(), static_copy), "static snapshot changed after 200 pushes");

  // Admission boundary at exactly 0.6.
  BinaryMask m(2, 2);
  m.set(0, 0, true);
  m.set(1, 1, true);
  ScoreMap prob(2, 2, 0.0);
  prob.at(0, 0) = 0.5;
  prob.at(1, 1) = 0.7;
  t.expect(amm_admit(prob, m, 0.6), "mean 0.6 must be admitted");
  prob.at(1, 1) = 0.6999;
  t.expect(!amm_admit(prob, m, 0.6), "mean 0.59995 must not be admitted");

  // Halt on the absence preset restores the initial banks and freezes them.
  const auto absence = harness::gen_scenario(1, harness::Preset::Absence);
  Pipeline q(absence.query, cfg);
  bool restored = false;
  for (std::size_t f = 0; f < absence.frame_count(); ++f) {
    q.step_frame(absence.frames[f], static_cast<int>(f));
    if (q.halted()) {
      restored = same_amm(q.amm_memory(), q.initial_amm_memory()) && same_glm(q.glm_memory(), q.initial_glm_memory());
      if (!restored) break;
    }
  }
  t.expect(q.halted(), "absence run never halted");
  t.expect(restored, "banks differ from the initial banks after the halt");
  for (const auto& e : q.update_events()) t.expect(!q.halt_frame() || e.frame_index < *q.halt_frame(), "update after halt");

  // Update schedule on an identity run long enough to pass frame 200.
  auto params = harness::preset_params(harness::Preset::Identity);
  params.frames = 201;
  const auto id = harness::gen_scenario(2, params, "identity");
  Pipeline r(id.query, cfg);
  for (std::size_t f = 0; f < id.frame_count(); ++f) r.step_frame(id.frames[f], static_cast<int>(f));
  std::vector<int> frames, want;
  for (const auto& e : r.update_events()) frames.push_back(e.frame_index);
  for (int f = 0; f < 100; ++f) want.push_back(f);
  for (int f : {100, 125, 150, 175, 200}) want.push_back(f);
  t.expect(frames == want, "update frames are not 0-99 then every 25 (" + std::to_string(frames.size()) + " events)");

  return t.result(std::to_string(admitted.size()) + " admissions and " + std::to_string(pushes) +
                  " dynamic pushes replayed; halt at frame " + (q.halt_frame() ? std::to_string(*q.halt_frame()) : "-") +
                  "; " + std::to_string(frames.size()) + " scheduled updates");
}

CheckResult end_to_end_2d() {
  const auto t0 = Clock::now();
  Tally t;
  const auto id = harness::gen_scenario(1, harness::Preset::Identity);
  const auto mid = harness::eval_2d(track_video(id.query, id.frames, {}), id);
  t.expect(mid.stAP25 == 1.0, "identity stAP25 " + num(mid.stAP25));
  t.expect(mid.recovery_pct == 100.0, "identity recovery " + num(mid.recovery_pct));

  PipelineConfig frozen;
  frozen.updates_enabled = false;
  double full = 0.0, ablated = 0.0;
  std::string below;
  const std::vector<std::uint64_t> seeds{1, 2, 3};
  for (auto seed : seeds) {
    const auto d = harness::gen_scenario(seed, harness::Preset::Drift);
    full += harness::eval_2d(track_video(d.query, d.frames, {}), d).temporal_iou;
    const TrackOutput off = track_video(d.query, d.frames, frozen);
    ablated += harness::eval_2d(off, d).temporal_iou;
    // the frozen filter must lose the target by frame 150
    t.expect(off.results[150].s_conf < 0.6, "frozen filter still admits frame 150 for seed " + std::to_string(seed));
    below += (below.empty() ? "" : "/") + num(off.results[150].s_conf);
  }
  full /= static_cast<double>(seeds.size());
  ablated /= static_cast<double>(seeds.size());
  const double secs = seconds_since(t0);
  t.expect(full - ablated >= 0.2, "tIoU gap " + num(full - ablated));
  t.expect(secs < 120.0, "runtime " + num(secs) + " s");
  return t.result("identity stAP25 " + num(mid.stAP25) + " recovery " + num(mid.recovery_pct) + "; drift tIoU " +
                  num(full) + " vs " + num(ablated) + " without updates; frame-150 s_conf " + below + "; " +
                  num(secs) + " s");
}

CheckResult end_to_end_3d() {
  Tally t;
  const auto s = harness::gen_scenario(1, harness::Preset::Geo);
  const TrackOutput track = track_video(s.query, s.frames, {});
  const TrackOutput out = finalize_3d(track, s.cameras, s.alignment_pairs);
  const double err = (*out.world_point - *s.gt_point).norm();
  t.expect(err <= 1e-6, "aggregate " + num(err) + " from ground truth");
  const auto m = harness::eval_3d(out, s);
  t.expect(m.l2 && *m.l2 < 1e-5, "eval_3d L2 " + (m.l2 ? num(*m.l2) : std::string("missing")));
  t.expect(m.angle && *m.angle < 1e-5, "eval_3d angle " + (m.angle ? num(*m.angle) : std::string("missing")));

  auto params = harness::preset_params(harness::Preset::Geo);
  params.corrupted_view = 2;
  params.corrupted_tau = 20.0;
  const auto c = harness::gen_scenario(1, params, "geo");
  const TrackOutput ct = track_video(c.query, c.frames, {});
  const Eigen::Vector3d with = *finalize_3d(ct, c.cameras, c.alignment_pairs).world_point;
  TrackOutput excl = ct;
  excl.results[2].mask = BinaryMask(c.height, c.width);
  excl.results[2].bbox.reset();
  const Eigen::Vector3d without = *finalize_3d(excl, c.cameras, c.alignment_pairs).world_point;
  const double shift = (with - without).norm();
  t.expect(shift < 1e-6, "corrupted view moves the aggregate by " + num(shift));
  return t.result("error " + num(err) + ", L2 " + (m.l2 ? num(*m.l2) : "-") + ", angle " +
                  (m.angle ? num(*m.angle) : "-") + ", corrupted-view shift " + num(shift));
}

CheckResult temporal_localization() {
  Tally t;
  std::vector<double> two(50, 0.05);
  for (int i = 5; i <= 14; ++i) two[static_cast<std::size_t>(i)] = 0.9;
  for (int i = 30; i <= 41; ++i) two[static_cast<std::size_t>(i)] = 0.95;
  const auto iv = temporal_localize(two);
  t.expect(iv && *iv == TemporalInterval{30, 41}, "two plateaus must give the last one (30, 41)");
  for (double k : {1e-3, 0.5, 7.0, 1e4}) {
    std::vector<double> scaled = two;
    for (double& v : scaled) v *= k;
    t.expect(temporal_localize(scaled) == iv, "interval changed under rescaling by " + num(k));
  }
  // Hand computation: window 5 median, threshold 0.8 * max.
  //   seq     0  0.2  1.0  0.9  0.95  0.1  0.85  0.9  0.8  0
  //   median  0  0.2  0.9  0.9  0.9   0.9  0.85  0.8  0.8  0     (windows shrink symmetrically at the ends)
  // max 0.9 -> threshold 0.72, so frames 2..8 qualify.
  const std::vector<double> seq{0.0, 0.2, 1.0, 0.9, 0.95, 0.1, 0.85, 0.9, 0.8, 0.0};
  const std::vector<double> med = median_filter_1d(seq, 5);
  const std::vector<double> hand{0.0, 0.2, 0.9, 0.9, 0.9, 0.9, 0.85, 0.8, 0.8, 0.0};
  t.expect(med == hand, "median filter differs from the hand computation");
  const auto hiv = temporal_localize(seq);
  t.expect(hiv && *hiv == TemporalInterval{2, 8}, "hand-computed interval (2, 8) not found");
  std::vector<double> flat(10, 0.0);
  t.expect(!temporal_localize(flat), "all-zero sequence must have no interval");
  return t.result();
}

CheckResult determinism() {
  Tally t;
  const auto s2 = harness::gen_scenario(4, harness::Preset::Distractor);
  const auto s3 = harness::gen_scenario(4, harness::Preset::Geo);
  const PipelineConfig cfg;
  const auto run = [&] {
    const std::string a = harness::run2d(s2, cfg);
    const std::string g = harness::run2d(s3, cfg);
    return std::pair{a, harness::run3d(s3, harness::track_from_json(g))};
  };
  const auto ref = run();
  t.expect(run() == ref, "two runs differ");
  for (int threads : {1, 4}) {
    tbb::global_control limit(tbb::global_control::max_allowed_parallelism, static_cast<std::size_t>(threads));
    t.expect(run() == ref, "output changes with " + std::to_string(threads) + " threads");
  }
  return t.result(std::to_string(ref.first.size() + ref.second.size()) + " bytes compared, 1 and 4 threads");
}

}  // namespace

std::vector<Check> acceptance_checks() {
  return {
      {"acceptance.1.gradient-fidelity", gradient_fidelity},
      {"acceptance.2.exact-line-search", exact_line_search},
      {"acceptance.3.closed-form-convergence", convergence},
      {"acceptance.4.gauss-newton-step", gauss_newton_step_size},
      {"acceptance.5.sim3-recovery", sim3_recovery},
      {"acceptance.6.projection-round-trips", projection_round_trips},
      {"acceptance.7.memory-policy", memory_policy},
      {"acceptance.8.end-to-end-2d", end_to_end_2d},
      {"acceptance.9.end-to-end-3d", end_to_end_3d},
      {"acceptance.10.temporal-localization", temporal_localization},
      {"acceptance.11.determinism", determinism},
  };
}

}  // namespace eagle::checks
