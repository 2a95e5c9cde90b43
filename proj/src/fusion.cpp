#include "eagle/fusion.hpp"

#include <algorithm>
#include <cmath>

#include "eagle/errors.hpp"
#include "eagle/signal.hpp"

namespace eagle {

FeatureMap encode_score(const ScoreMap& response, const ScoreEncoder& enc) {
  if (enc.out_channels <= 0) throw ParameterError("encode_score: out_channels must be positive");
  FeatureMap out(response.height, response.width, enc.out_channels);
  for (std::size_t p = 0; p < response.data.size(); ++p) {
    const double v = std::max(0.0, enc.gain * response.data[p] + enc.bias);
    for (int c = 0; c < enc.out_channels; ++c) out.data[p * static_cast<std::size_t>(enc.out_channels) + c] = v;
  }
  return out;
}

FeatureMap fuse(const FeatureMap& appearance, const FeatureMap& tracking) {
  if (!appearance.same_shape(tracking)) throw DimensionError("fuse: feature maps differ in shape");
  FeatureMap out = appearance;
  for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] += tracking.data[i];
  return out;
}

namespace {

double logistic(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

ScoreMap decode(const FeatureMap& fused, const Decoder& dec) {
  ScoreMap out(fused.height, fused.width);
  const std::size_t c = static_cast<std::size_t>(fused.channels);
  for (std::size_t p = 0; p < out.data.size(); ++p) {
    double mean = 0.0;
    for (std::size_t k = 0; k < c; ++k) mean += fused.data[p * c + k];
    mean /= static_cast<double>(c);
    out.data[p] = logistic(dec.gain * mean + dec.bias);
  }
  return out;
}

SegmentationResult extract_result(const ScoreMap& prob, int frame_index, double mask_threshold) {
  SegmentationResult r;
  r.prob = prob;
  r.frame_index = frame_index;
  r.mask = BinaryMask(prob.height, prob.width);
  double sum = 0.0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < prob.data.size(); ++i) {
    if (prob.data[i] >= mask_threshold) {
      r.mask.data[i] = 1;
      sum += prob.data[i];
      ++n;
    }
  }
  if (n == 0) return r;
  r.s_conf = sum / static_cast<double>(n);
  const auto comps = connected_components(r.mask);
  std::size_t best = 0;
  for (std::size_t i = 1; i < comps.size(); ++i) {
    if (comps[i].size() > comps[best].size()) best = i;
  }
  r.bbox = min_bounding_rect(comps[best]);
  return r;
}

std::optional<TemporalInterval> temporal_localize(std::span<const double> s_conf, int window, double ratio) {
  if (s_conf.empty()) throw EmptyInputError("temporal_localize: empty confidence sequence");
  const auto filtered = median_filter_1d(s_conf, window);
  const double peak = *std::max_element(filtered.begin(), filtered.end());
  if (!(peak > 0.0)) return std::nullopt;
  const double threshold = ratio * peak;
  int end = static_cast<int>(filtered.size()) - 1;
  while (end >= 0 && !(filtered[static_cast<std::size_t>(end)] >= threshold)) --end;
  if (end < 0) return std::nullopt;
  int start = end;
  while (start > 0 && filtered[static_cast<std::size_t>(start - 1)] >= threshold) --start;
  return TemporalInterval{start, end};
}

}  // namespace eagle
