#include "eagle/glm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eagle/amm.hpp"
#include "eagle/conv.hpp"
#include "eagle/crop.hpp"
#include "eagle/errors.hpp"
#include "eagle/parallel.hpp"

namespace eagle {

void SpatialWeightFn::validate() const {
  if (!(w_bg > 0.0) || !(w_fg >= w_bg)) throw ParameterError("spatial weight needs w_fg >= w_bg > 0");
}

ScoreMap spatial_weight(const ScoreMap& label, const SpatialWeightFn& fn) {
  fn.validate();
  ScoreMap out = label;
  for (double& v : out.data) v = fn.w_bg + (fn.w_fg - fn.w_bg) * v;
  return out;
}

void GlmSample::validate() const {
  if (!label.same_dims(feature.height, feature.width) || !target_region.same_dims(feature.height, feature.width)) {
    throw DimensionError("GLM sample feature, label and target region sizes differ");
  }
  for (double s : target_region.data) {
    if (!(s >= 0.0 && s <= 1.0)) throw ParameterError("GLM target region values must lie in [0, 1]");
  }
}

GlmMemory::GlmMemory(GlmSample static_entry, int capacity) : static_(std::move(static_entry)), capacity_(capacity) {
  if (capacity < 1) throw ParameterError("GLM capacity must be at least 1");
  static_.validate();
  static_.kind = SnapshotKind::Static;
}

void GlmMemory::push_dynamic(GlmSample sample) {
  sample.validate();
  if (sample.feature.height != static_.feature.height || sample.feature.width != static_.feature.width ||
      sample.feature.channels != static_.feature.channels) {
    throw DimensionError("GLM dynamic snapshot shape differs from the static snapshot");
  }
  sample.kind = SnapshotKind::Dynamic;
  dynamic_.push_back(std::move(sample));
  while (dynamic_.size() + 1 > static_cast<std::size_t>(capacity_)) dynamic_.pop_front();
}

std::vector<const GlmSample*> GlmMemory::all() const {
  std::vector<const GlmSample*> out;
  out.reserve(size());
  out.push_back(&static_);
  for (const auto& s : dynamic_) out.push_back(&s);
  return out;
}

TrackFilter TrackFilter::zeros(int k, int in_channels, double regularizer) {
  if (!(regularizer > 0.0)) throw ParameterError("tracking regularizer must be positive");
  return TrackFilter{ConvKernel({k, in_channels, 1}), regularizer};
}

namespace {

void check_response(const ScoreMap& response, const GlmSample& sample) {
  if (!response.same_dims(sample.label.height, sample.label.width) ||
      !sample.target_region.same_dims(response.height, response.width)) {
    throw DimensionError("track residual: response and snapshot sizes differ");
  }
}

// Residual and its H_J-derivative given precomputed sw_G.
void residual_parts(const ScoreMap& hj, const GlmSample& s, const ScoreMap& sw, ScoreMap* res, ScoreMap* q) {
  for (std::size_t i = 0; i < hj.data.size(); ++i) {
    const double h = hj.data[i];
    const double S = s.target_region.data[i];
    if (res) res->data[i] = sw.data[i] * (S * h + (1.0 - S) * std::max(0.0, h) - s.label.data[i]);
    if (q) q->data[i] = sw.data[i] * (S + (1.0 - S) * (h > 0.0 ? 1.0 : 0.0));
  }
}

ScoreMap response_of(const FeatureMap& f, const ConvKernel& c) {
  FeatureMap r = conv2d(f, c);
  return ScoreMap(r.height, r.width, std::move(r.data));
}

}  // namespace

ScoreMap track_residual(const ScoreMap& response, const GlmSample& sample, const SpatialWeightFn& fn) {
  check_response(response, sample);
  ScoreMap sw = spatial_weight(sample.label, fn);
  ScoreMap out(response.height, response.width);
  residual_parts(response, sample, sw, &out, nullptr);
  return out;
}

ScoreMap residual_derivative(const ScoreMap& response, const GlmSample& sample, const SpatialWeightFn& fn) {
  check_response(response, sample);
  ScoreMap sw = spatial_weight(sample.label, fn);
  ScoreMap out(response.height, response.width);
  residual_parts(response, sample, sw, nullptr, &out);
  return out;
}

TrackObjective::TrackObjective(std::vector<const GlmSample*> samples, const SpatialWeightFn& fn, double regularizer)
    : samples_(std::move(samples)), lambda_(regularizer) {
  if (samples_.empty()) throw EmptyInputError("track objective needs at least one snapshot");
  if (!(regularizer >= 0.0)) throw ParameterError("tracking regularizer must be non-negative");
  weights_.reserve(samples_.size());
  for (const GlmSample* s : samples_) {
    s->validate();
    if (s->feature.channels != samples_.front()->feature.channels) {
      throw DimensionError("GLM snapshots disagree on channel count");
    }
    weights_.push_back(spatial_weight(s->label, fn));
  }
}

ScoreMap TrackObjective::response(std::size_t i, const ConvKernel& c) const {
  if (c.out_channels != 1) throw DimensionError("tracking filter must have one output channel");
  return response_of(samples_[i]->feature, c);
}

double TrackObjective::residual_norm_sq(std::size_t i, const ScoreMap& hj) const {
  check_response(hj, *samples_[i]);
  ScoreMap res(hj.height, hj.width);
  residual_parts(hj, *samples_[i], weights_[i], &res, nullptr);
  return squared_norm(res.data);
}

ScoreMap TrackObjective::weighted_residual(std::size_t i, const ScoreMap& hj) const {
  check_response(hj, *samples_[i]);
  ScoreMap res(hj.height, hj.width), q(hj.height, hj.width);
  residual_parts(hj, *samples_[i], weights_[i], &res, &q);
  for (std::size_t j = 0; j < res.data.size(); ++j) res.data[j] *= q.data[j];
  return res;
}

ScoreMap TrackObjective::derivative(std::size_t i, const ScoreMap& hj) const {
  check_response(hj, *samples_[i]);
  ScoreMap q(hj.height, hj.width);
  residual_parts(hj, *samples_[i], weights_[i], nullptr, &q);
  return q;
}

double TrackObjective::loss(const ConvKernel& c) const {
  std::vector<double> parts(samples_.size());
  parallel_for_index(samples_.size(), [&](std::size_t i) { parts[i] = residual_norm_sq(i, response(i, c)); });
  double acc = 0.0;
  for (double p : parts) acc += p;
  return acc / static_cast<double>(samples_.size()) + lambda_ * lambda_ * squared_norm(c.data);
}

ConvKernel TrackObjective::gradient(const ConvKernel& c) const {
  std::vector<ConvKernel> parts(samples_.size());
  parallel_for_index(samples_.size(), [&](std::size_t i) {
    parts[i] = kernel_gradient(samples_[i]->feature, weighted_residual(i, response(i, c)), c.shape());
  });
  ConvKernel g(c.shape());
  const double scale = 2.0 / static_cast<double>(samples_.size());
  for (const auto& p : parts) axpy(scale, p.data, g.data);
  axpy(2.0 * lambda_ * lambda_, c.data, g.data);
  return g;
}

ConvKernel TrackObjective::gauss_newton_product(const ConvKernel& c, const ConvKernel& v) const {
  std::vector<ConvKernel> parts(samples_.size());
  parallel_for_index(samples_.size(), [&](std::size_t i) {
    ScoreMap q = derivative(i, response(i, c));
    ScoreMap jv = response(i, v);
    for (std::size_t j = 0; j < jv.data.size(); ++j) jv.data[j] *= q.data[j] * q.data[j];
    parts[i] = kernel_gradient(samples_[i]->feature, jv, v.shape());
  });
  ConvKernel out(v.shape());
  const double scale = 2.0 / static_cast<double>(samples_.size());
  for (const auto& p : parts) axpy(scale, p.data, out.data);
  axpy(2.0 * lambda_ * lambda_, v.data, out.data);
  return out;
}

namespace {

// (2/|O|) sum ||Q_i (.) Fv_i||^2 + 2 lambda^2 ||v||^2
double gn_quadratic(const std::vector<ScoreMap>& q, const std::vector<ScoreMap>& fv, double lambda,
                    const ConvKernel& v) {
  double acc = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i) {
    for (std::size_t j = 0; j < fv[i].data.size(); ++j) {
      const double e = q[i].data[j] * fv[i].data[j];
      acc += e * e;
    }
  }
  return 2.0 * acc / static_cast<double>(q.size()) + 2.0 * lambda * lambda * squared_norm(v.data);
}

}  // namespace

double TrackObjective::gauss_newton_quadratic(const ConvKernel& c, const ConvKernel& v) const {
  std::vector<ScoreMap> q(samples_.size()), fv(samples_.size());
  parallel_for_index(samples_.size(), [&](std::size_t i) {
    q[i] = derivative(i, response(i, c));
    fv[i] = response(i, v);
  });
  return gn_quadratic(q, fv, lambda_, v);
}

double track_loss(const TrackFilter& c, const GlmMemory& mem, const SpatialWeightFn& fn) {
  return TrackObjective(mem.all(), fn, c.regularizer).loss(c.kernel);
}

ConvKernel track_gradient(const TrackFilter& c, const GlmMemory& mem, const SpatialWeightFn& fn) {
  return TrackObjective(mem.all(), fn, c.regularizer).gradient(c.kernel);
}

std::optional<GaussNewtonStep> gauss_newton_step(const ConvKernel& c, const TrackObjective& objective) {
  ConvKernel g = objective.gradient(c);
  const double gg = squared_norm(g.data);
  if (std::sqrt(gg) < kGradientTolerance) return std::nullopt;
  const double denom = objective.gauss_newton_quadratic(c, g);
  if (!(denom > 0.0)) throw ParameterError("gauss_newton_step: zero curvature along the gradient");
  return GaussNewtonStep{std::move(g), gg / denom};
}

std::optional<GaussNewtonStep> gauss_newton_step(const TrackFilter& c, const GlmMemory& mem,
                                                 const SpatialWeightFn& fn) {
  return gauss_newton_step(c.kernel, TrackObjective(mem.all(), fn, c.regularizer));
}

TrackFilter optimize_filter(const TrackFilter& init, const TrackObjective& obj, int n_iter, OptimizeTrace* trace) {
  if (n_iter < 0) throw ParameterError("optimize_filter: n_iter must be non-negative");
  TrackFilter cur = init;
  const std::size_t n = obj.size();
  const double lambda = obj.regularizer();

  // Responses are cached and moved linearly: F * (c - b g) = F * c - b (F * g).
  std::vector<ScoreMap> resp(n);
  parallel_for_index(n, [&](std::size_t i) { resp[i] = obj.response(i, cur.kernel); });

  auto loss_of = [&](const std::vector<ScoreMap>& r, const ConvKernel& k) {
    std::vector<double> parts(n);
    parallel_for_index(n, [&](std::size_t i) { parts[i] = obj.residual_norm_sq(i, r[i]); });
    double acc = 0.0;
    for (double p : parts) acc += p;
    return acc / static_cast<double>(n) + lambda * lambda * squared_norm(k.data);
  };

  double loss = loss_of(resp, cur.kernel);
  if (trace) {
    *trace = OptimizeTrace{};
    trace->losses.push_back(loss);
  }

  for (int it = 0; it < n_iter; ++it) {
    std::vector<ConvKernel> parts(n);
    std::vector<ScoreMap> q(n);
    parallel_for_index(n, [&](std::size_t i) {
      q[i] = obj.derivative(i, resp[i]);
      parts[i] = kernel_gradient(obj.samples()[i]->feature, obj.weighted_residual(i, resp[i]), cur.kernel.shape());
    });
    ConvKernel g(cur.kernel.shape());
    for (const auto& p : parts) axpy(2.0 / static_cast<double>(n), p.data, g.data);
    axpy(2.0 * lambda * lambda, cur.kernel.data, g.data);

    const double gg = squared_norm(g.data);
    if (std::sqrt(gg) < kGradientTolerance) {
      if (trace) trace->converged = true;
      break;
    }
    std::vector<ScoreMap> fg(n);
    parallel_for_index(n, [&](std::size_t i) { fg[i] = obj.response(i, g); });
    const double denom = gn_quadratic(q, fg, lambda, g);
    if (!(denom > 0.0)) throw ParameterError("optimize_filter: zero curvature along the gradient");
    double beta = gg / denom;

    bool accepted = false;
    for (int h = 0; h <= kMaxStepHalvings; ++h, beta *= 0.5) {
      ConvKernel next = cur.kernel;
      axpy(-beta, g.data, next.data);
      std::vector<ScoreMap> next_resp = resp;
      for (std::size_t i = 0; i < n; ++i) axpy(-beta, fg[i].data, next_resp[i].data);
      const double next_loss = loss_of(next_resp, next);
      if (next_loss <= loss) {
        cur.kernel = std::move(next);
        resp = std::move(next_resp);
        loss = next_loss;
        accepted = true;
        if (trace) trace->halvings += h;
        break;
      }
    }
    if (!accepted) {
      if (trace) trace->converged = true;
      break;
    }
    if (trace) {
      trace->losses.push_back(loss);
      trace->iterations = it + 1;
    }
  }
  return cur;
}

TrackFilter optimize_filter(const TrackFilter& init, const GlmMemory& mem, int n_iter, const SpatialWeightFn& fn,
                            OptimizeTrace* trace) {
  return optimize_filter(init, TrackObjective(mem.all(), fn, init.regularizer), n_iter, trace);
}

namespace {

GlmSample make_sample(const FeatureMap& frame, const BBox& bbox, const ScoreMap& region, int resolution,
                      SnapshotKind kind) {
  if (bbox.x_max < bbox.x_min || bbox.y_max < bbox.y_min) throw EmptyInputError("GLM sample: degenerate bbox");
  if (!region.same_dims(frame.height, frame.width)) throw DimensionError("GLM sample: map sizes differ");
  const double side = 1.5 * std::max(bbox.width(), bbox.height());
  const double cx = (bbox.x_min + bbox.x_max + 1) / 2.0;
  const double cy = (bbox.y_min + bbox.y_max + 1) / 2.0;
  const CropWindow win = centered_window(cx, cy, side, frame.height, frame.width);
  GlmSample s;
  s.feature = resample_bilinear(frame, win, resolution);
  s.target_region = resample_bilinear(region, win, resolution);
  for (double& v : s.target_region.data) v = std::clamp(v, 0.0, 1.0);
  const double sigma = glm_label_sigma(side) * resolution / side;
  const double center = resolution / 2.0 - 0.5;
  s.label = gaussian_label(center, center, sigma, resolution, resolution);
  s.kind = kind;
  return s;
}

}  // namespace

GlmSample glm_make_dynamic_sample(const FeatureMap& frame_feature, const BBox& bbox, const ScoreMap& prob,
                                  int resolution) {
  return make_sample(frame_feature, bbox, prob, resolution, SnapshotKind::Dynamic);
}

GlmSample glm_make_static_sample(const FeatureMap& query_feature, const BinaryMask& query_mask, int resolution) {
  if (!query_mask.same_dims(query_feature.height, query_feature.width)) {
    throw DimensionError("GLM static sample: mask and feature sizes differ");
  }
  auto comps = connected_components(query_mask);
  if (comps.empty()) throw EmptyInputError("GLM static sample: query mask is empty");
  std::vector<Pixel> all;
  for (auto& c : comps) all.insert(all.end(), c.begin(), c.end());
  ScoreMap region(query_mask.height, query_mask.width);
  for (std::size_t i = 0; i < query_mask.data.size(); ++i) region.data[i] = query_mask.data[i];
  return make_sample(query_feature, min_bounding_rect(all), region, resolution, SnapshotKind::Static);
}

UpdateSource glm_update_source(std::span<const double> peaks, int window, double high_ratio, double min_fraction) {
  if (peaks.empty()) throw EmptyInputError("glm_update_source: empty response history");
  if (window <= 0) throw ParameterError("glm_update_source: window must be positive");
  const std::size_t n = peaks.size();
  const std::size_t first = n > static_cast<std::size_t>(window) ? n - static_cast<std::size_t>(window) : 0;
  double running_max = peaks[0];
  std::size_t high = 0;
  for (std::size_t i = 0; i < n; ++i) {
    running_max = std::max(running_max, peaks[i]);
    if (i >= first && peaks[i] >= high_ratio * running_max) ++high;
  }
  const double fraction = static_cast<double>(high) / static_cast<double>(n - first);
  return fraction > min_fraction ? UpdateSource::Dynamic : UpdateSource::Static;
}

}  // namespace eagle
