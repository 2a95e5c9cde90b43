#include "eagle/amm.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "eagle/conv.hpp"
#include "eagle/errors.hpp"
#include "eagle/mask_ops.hpp"
#include "eagle/parallel.hpp"

namespace eagle {

FeatureMap encode_pseudo_label(const BinaryMask& mask, const PseudoLabelEncoder& enc) {
  if (enc.out_channels != 3) throw ParameterError("encode_pseudo_label: only 3 output channels are defined");
  FeatureMap out(mask.height, mask.width, 3);
  const auto centroid = mask_centroid(mask);
  if (!centroid) return out;
  const double area = static_cast<double>(mask.count());
  const double radius = std::max(1.0, std::sqrt(area) / 2.0);
  const double inv = 1.0 / (2.0 * radius * radius);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      bool boundary = false;
      constexpr int dr[4] = {-1, 1, 0, 0};
      constexpr int dc[4] = {0, 0, -1, 1};
      for (int n = 0; n < 4 && !boundary; ++n) {
        const int ny = y + dr[n], nx = x + dc[n];
        // Pixels past the image edge count as background.
        boundary = ny < 0 || nx < 0 || ny >= mask.height || nx >= mask.width || !mask.at(ny, nx);
      }
      const double dy = y - centroid->row, dx = x - centroid->col;
      out.at(y, x, 0) = 1.0;
      out.at(y, x, 1) = boundary ? 1.0 : 0.0;
      out.at(y, x, 2) = std::exp(-(dy * dy + dx * dx) * inv);
    }
  }
  return out;
}

void TargetReweighter::validate() const {
  if (!(background_weight > 0.0) || !(foreground_weight >= background_weight)) {
    throw ParameterError("reweighter needs foreground_weight >= background_weight > 0");
  }
  if (!(blur_sigma >= 0.0)) throw ParameterError("reweighter blur_sigma must be non-negative");
}

ScoreMap gaussian_blur(const ScoreMap& src, double sigma) {
  if (!(sigma >= 0.0)) throw ParameterError("gaussian_blur: sigma must be non-negative");
  if (sigma == 0.0) return src;
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> taps(static_cast<std::size_t>(2 * radius + 1));
  for (int t = -radius; t <= radius; ++t) {
    taps[static_cast<std::size_t>(t + radius)] = std::exp(-(t * t) / (2.0 * sigma * sigma));
  }
  auto pass = [&](const ScoreMap& in, bool horizontal) {
    ScoreMap out(in.height, in.width);
    const int n = horizontal ? in.width : in.height;
    for (int y = 0; y < in.height; ++y) {
      for (int x = 0; x < in.width; ++x) {
        const int p = horizontal ? x : y;
        double acc = 0.0, norm = 0.0;
        for (int t = std::max(-radius, -p); t <= std::min(radius, n - 1 - p); ++t) {
          const double w = taps[static_cast<std::size_t>(t + radius)];
          acc += w * (horizontal ? in.at(y, x + t) : in.at(y + t, x));
          norm += w;
        }
        out.at(y, x) = acc / norm;
      }
    }
    return out;
  };
  return pass(pass(src, true), false);
}

ScoreMap reweight(const BinaryMask& mask, const TargetReweighter& rw) {
  rw.validate();
  ScoreMap m(mask.height, mask.width);
  for (std::size_t i = 0; i < mask.data.size(); ++i) m.data[i] = mask.data[i];
  ScoreMap blurred = gaussian_blur(m, rw.blur_sigma);
  const double span = rw.foreground_weight - rw.background_weight;
  for (double& v : blurred.data) {
    v = std::clamp(rw.background_weight + span * v, rw.background_weight, rw.foreground_weight);
  }
  return blurred;
}

AmmMemory::AmmMemory(int capacity, int resolution) : capacity_(capacity), resolution_(resolution) {
  if (capacity <= 0) throw ParameterError("memory capacity must be positive");
  if (resolution <= 0) throw ParameterError("memory resolution must be positive");
}

void AmmMemory::update(AmmSample sample) {
  if (sample.feature.height != resolution_ || sample.feature.width != resolution_ ||
      !sample.mask.same_dims(resolution_, resolution_)) {
    throw DimensionError("amm_update: sample must be " + std::to_string(resolution_) + "x" +
                         std::to_string(resolution_));
  }
  if (!entries_.empty() && entries_.front().feature.channels != sample.feature.channels) {
    throw DimensionError("amm_update: sample channel count differs from the bank");
  }
  entries_.push_back(std::move(sample));
  while (entries_.size() > static_cast<std::size_t>(capacity_)) entries_.pop_front();
}

SegFilter SegFilter::zeros(int k, int in_channels, int out_channels, double regularizer) {
  if (!(regularizer > 0.0)) throw ParameterError("segmentation regularizer must be positive");
  return SegFilter{ConvKernel({k, in_channels, out_channels}), regularizer};
}

namespace {

std::vector<const AmmSample*> pointers(const AmmMemory& mem) {
  std::vector<const AmmSample*> out;
  out.reserve(mem.size());
  for (const auto& s : mem.entries()) out.push_back(&s);
  return out;
}

// sum_p w_p^2 * sum_d v[p, d]^2
double weighted_sq(const FeatureMap& v, const std::vector<double>& weight_sq) {
  double acc = 0.0;
  const int d = v.channels;
  for (std::size_t p = 0; p < weight_sq.size(); ++p) {
    double s = 0.0;
    for (int c = 0; c < d; ++c) {
      const double e = v.data[p * static_cast<std::size_t>(d) + c];
      s += e * e;
    }
    acc += weight_sq[p] * s;
  }
  return acc;
}

}  // namespace

SegObjective::SegObjective(std::vector<const AmmSample*> samples, const PseudoLabelEncoder& enc,
                           const TargetReweighter& rw, double regularizer)
    : delta_(regularizer) {
  if (!(regularizer >= 0.0)) throw ParameterError("regularizer must be non-negative");
  terms_.reserve(samples.size());
  for (const AmmSample* s : samples) {
    if (!s->mask.same_dims(s->feature.height, s->feature.width)) {
      throw DimensionError("AMM sample feature and mask sizes differ");
    }
    Term t{&s->feature, encode_pseudo_label(s->mask, enc), {}};
    ScoreMap w = reweight(s->mask, rw);
    t.weight_sq.resize(w.data.size());
    for (std::size_t i = 0; i < w.data.size(); ++i) t.weight_sq[i] = w.data[i] * w.data[i];
    terms_.push_back(std::move(t));
  }
}

SegObjective::SegObjective(const AmmMemory& mem, const PseudoLabelEncoder& enc, const TargetReweighter& rw,
                           double regularizer)
    : SegObjective(pointers(mem), enc, rw, regularizer) {}

double SegObjective::loss(const ConvKernel& sigma) const {
  std::vector<double> parts(terms_.size());
  parallel_for_index(terms_.size(), [&](std::size_t i) {
    const Term& t = terms_[i];
    FeatureMap r = conv2d(*t.feature, sigma);
    if (!r.same_shape(t.label)) throw DimensionError("seg_loss: filter output channels differ from label channels");
    for (std::size_t j = 0; j < r.data.size(); ++j) r.data[j] -= t.label.data[j];
    parts[i] = weighted_sq(r, t.weight_sq);
  });
  double acc = 0.0;
  for (double p : parts) acc += p;
  return 0.5 * acc + 0.5 * delta_ * squared_norm(sigma.data);
}

ConvKernel SegObjective::gradient(const ConvKernel& sigma) const {
  std::vector<ConvKernel> parts(terms_.size());
  parallel_for_index(terms_.size(), [&](std::size_t i) {
    const Term& t = terms_[i];
    FeatureMap r = conv2d(*t.feature, sigma);
    if (!r.same_shape(t.label)) throw DimensionError("seg_gradient: filter output channels differ from label channels");
    const int d = r.channels;
    for (std::size_t p = 0; p < t.weight_sq.size(); ++p) {
      for (int c = 0; c < d; ++c) {
        const std::size_t j = p * static_cast<std::size_t>(d) + c;
        r.data[j] = t.weight_sq[p] * (r.data[j] - t.label.data[j]);
      }
    }
    parts[i] = kernel_gradient(*t.feature, r, sigma.shape());
  });
  ConvKernel g(sigma.shape());
  for (const auto& p : parts) axpy(1.0, p.data, g.data);
  axpy(delta_, sigma.data, g.data);
  return g;
}

double SegObjective::curvature(const ConvKernel& g) const {
  std::vector<double> parts(terms_.size());
  parallel_for_index(terms_.size(), [&](std::size_t i) {
    parts[i] = weighted_sq(conv2d(*terms_[i].feature, g), terms_[i].weight_sq);
  });
  double acc = 0.0;
  for (double p : parts) acc += p;
  return acc + delta_ * squared_norm(g.data);
}

std::optional<double> SegObjective::step_size(const ConvKernel& g) const {
  const double gg = squared_norm(g.data);
  if (gg == 0.0) return std::nullopt;
  const double denom = curvature(g);
  if (!(denom > 0.0)) throw ParameterError("steepest_step_size: curvature along the gradient is zero");
  return gg / denom;
}

double seg_loss(const SegFilter& sigma, const AmmMemory& mem, const PseudoLabelEncoder& enc,
                const TargetReweighter& rw) {
  return SegObjective(mem, enc, rw, sigma.regularizer).loss(sigma.kernel);
}

ConvKernel seg_gradient(const SegFilter& sigma, const AmmMemory& mem, const PseudoLabelEncoder& enc,
                        const TargetReweighter& rw) {
  return SegObjective(mem, enc, rw, sigma.regularizer).gradient(sigma.kernel);
}

std::optional<double> steepest_step_size(const ConvKernel& g, const AmmMemory& mem, const TargetReweighter& rw,
                                         double regularizer) {
  // The label does not enter the curvature; the default encoder is only needed to build the objective.
  return SegObjective(mem, PseudoLabelEncoder{}, rw, regularizer).step_size(g);
}

SegFilter steepest_descent(const SegFilter& init, const SegObjective& obj, int n_iter, DescentTrace* trace) {
  if (n_iter < 0) throw ParameterError("steepest_descent: n_iter must be non-negative");
  SegFilter cur = init;
  const std::size_t n = obj.terms_.size();
  const double delta = obj.delta_;

  // Cached predictions F_i * sigma, updated in place since F_i * (sigma - a g) = F_i * sigma - a F_i * g.
  std::vector<FeatureMap> pred(n);
  parallel_for_index(n, [&](std::size_t i) { pred[i] = conv2d(*obj.terms_[i].feature, cur.kernel); });
  for (std::size_t i = 0; i < n; ++i) {
    if (!pred[i].same_shape(obj.terms_[i].label)) {
      throw DimensionError("steepest_descent: filter output channels differ from label channels");
    }
  }

  auto loss_of = [&](const std::vector<FeatureMap>& p, const ConvKernel& k) {
    std::vector<double> parts(n);
    parallel_for_index(n, [&](std::size_t i) {
      FeatureMap r = p[i];
      for (std::size_t j = 0; j < r.data.size(); ++j) r.data[j] -= obj.terms_[i].label.data[j];
      parts[i] = weighted_sq(r, obj.terms_[i].weight_sq);
    });
    double acc = 0.0;
    for (double v : parts) acc += v;
    return 0.5 * acc + 0.5 * delta * squared_norm(k.data);
  };

  double loss = loss_of(pred, cur.kernel);
  if (trace) {
    *trace = DescentTrace{};
    trace->losses.push_back(loss);
  }

  for (int it = 0; it < n_iter; ++it) {
    std::vector<ConvKernel> parts(n);
    parallel_for_index(n, [&](std::size_t i) {
      const auto& t = obj.terms_[i];
      FeatureMap r = pred[i];
      const int d = r.channels;
      for (std::size_t p = 0; p < t.weight_sq.size(); ++p) {
        for (int c = 0; c < d; ++c) {
          const std::size_t j = p * static_cast<std::size_t>(d) + c;
          r.data[j] = t.weight_sq[p] * (r.data[j] - t.label.data[j]);
        }
      }
      parts[i] = kernel_gradient(*t.feature, r, cur.kernel.shape());
    });
    ConvKernel g(cur.kernel.shape());
    for (const auto& p : parts) axpy(1.0, p.data, g.data);
    axpy(delta, cur.kernel.data, g.data);

    const double gg = squared_norm(g.data);
    if (std::sqrt(gg) < kGradientTolerance) {
      if (trace) trace->converged = true;
      break;
    }
    std::vector<FeatureMap> fg(n);
    std::vector<double> curv(n);
    parallel_for_index(n, [&](std::size_t i) {
      fg[i] = conv2d(*obj.terms_[i].feature, g);
      curv[i] = weighted_sq(fg[i], obj.terms_[i].weight_sq);
    });
    double denom = delta * gg;
    for (double c : curv) denom += c;
    if (!(denom > 0.0)) throw ParameterError("steepest_descent: curvature along the gradient is zero");
    const double alpha = gg / denom;

    ConvKernel next = cur.kernel;
    axpy(-alpha, g.data, next.data);
    std::vector<FeatureMap> next_pred = pred;
    for (std::size_t i = 0; i < n; ++i) axpy(-alpha, fg[i].data, next_pred[i].data);
    const double next_loss = loss_of(next_pred, next);
    if (next_loss > loss) {
      if (trace) trace->converged = true;
      break;
    }
    cur.kernel = std::move(next);
    pred = std::move(next_pred);
    loss = next_loss;
    if (trace) {
      trace->losses.push_back(loss);
      trace->iterations = it + 1;
    }
  }
  return cur;
}

SegFilter steepest_descent(const SegFilter& init, const AmmMemory& mem, int n_iter, const PseudoLabelEncoder& enc,
                           const TargetReweighter& rw, DescentTrace* trace) {
  return steepest_descent(init, SegObjective(mem, enc, rw, init.regularizer), n_iter, trace);
}

bool amm_admit(const ScoreMap& prob, const BinaryMask& mask, double threshold) {
  if (!mask.same_dims(prob.height, prob.width)) throw DimensionError("amm_admit: probability and mask sizes differ");
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < mask.data.size(); ++i) {
    if (!mask.data[i]) continue;
    sum += prob.data[i];
    ++n;
  }
  return n > 0 && sum / static_cast<double>(n) >= threshold;
}

AmmSample crop_sample(const FeatureMap& frame_feature, const BinaryMask& mask, int resolution, double confidence) {
  if (!mask.same_dims(frame_feature.height, frame_feature.width)) {
    throw DimensionError("crop_sample: mask and feature sizes differ");
  }
  const CropWindow win = mask_crop_window(mask);
  return AmmSample{resample_bilinear(frame_feature, win, resolution), resample_nearest(mask, win, resolution),
                   confidence};
}

}  // namespace eagle
