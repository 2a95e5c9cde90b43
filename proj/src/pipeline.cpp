#include "eagle/pipeline.hpp"

#include <algorithm>
#include <cmath>

#include "eagle/conv.hpp"
#include "eagle/errors.hpp"

namespace eagle {

namespace {

void require_unit(double v, const char* name) {
  if (!(v >= 0.0 && v <= 1.0)) throw ParameterError(std::string("pipeline config: ") + name + " must lie in [0, 1]");
}

void require_positive(int v, const char* name) {
  if (v <= 0) throw ParameterError(std::string("pipeline config: ") + name + " must be positive");
}

void require_non_negative(int v, const char* name) {
  if (v < 0) throw ParameterError(std::string("pipeline config: ") + name + " must be non-negative");
}

ScoreMap single_channel(const FeatureMap& f) {
  ScoreMap out(f.height, f.width);
  out.data = f.data;
  return out;
}

}  // namespace

void PipelineConfig::validate() const {
  require_positive(clip_length, "clip_length");
  require_non_negative(dense_update_horizon, "dense_update_horizon");
  require_positive(update_stride, "update_stride");
  require_non_negative(amm_iters_init, "amm_iters_init");
  require_non_negative(amm_iters_update, "amm_iters_update");
  require_non_negative(glm_iters_init, "glm_iters_init");
  require_non_negative(glm_iters_update, "glm_iters_update");
  require_unit(admit_threshold, "admit_threshold");
  require_unit(halt_threshold, "halt_threshold");
  require_positive(halt_window, "halt_window");
  require_unit(temporal_ratio, "temporal_ratio");
  if (median_window <= 0 || median_window % 2 == 0) {
    throw ParameterError("pipeline config: median_window must be odd and positive");
  }
  if (capacity < 2) throw ParameterError("pipeline config: capacity must be at least 2");
  if (!(zeta > 0.0)) throw ParameterError("pipeline config: zeta must be positive");
  require_unit(lambda_thr, "lambda_thr");
  require_positive(sample_resolution, "sample_resolution");
  if (seg_kernel <= 0 || seg_kernel % 2 == 0 || track_kernel <= 0 || track_kernel % 2 == 0) {
    throw ParameterError("pipeline config: kernel sizes must be odd and positive");
  }
  if (label_channels != 3) throw ParameterError("pipeline config: label_channels must be 3");
  if (!(seg_regularizer > 0.0)) throw ParameterError("pipeline config: seg_regularizer must be positive");
  if (!(track_regularizer >= 0.0)) throw ParameterError("pipeline config: track_regularizer must be non-negative");
  require_unit(mask_threshold, "mask_threshold");
  require_positive(source_window, "source_window");
  require_unit(source_high_ratio, "source_high_ratio");
  require_unit(source_min_fraction, "source_min_fraction");
  reweighter.validate();
  spatial_weight.validate();
  if (score_encoder.out_channels != label_channels) {
    throw ParameterError("pipeline config: score encoder channels must equal label_channels");
  }
  if (!std::isfinite(score_encoder.gain) || !std::isfinite(score_encoder.bias) || !std::isfinite(decoder.gain) ||
      !std::isfinite(decoder.bias)) {
    throw ParameterError("pipeline config: encoder/decoder parameters must be finite");
  }
}

bool is_update_frame(int frame_index, const PipelineConfig& cfg) {
  if (frame_index < 0) return false;
  return frame_index < cfg.dense_update_horizon || frame_index % cfg.update_stride == 0;
}

std::vector<AmmSample> augment_query_sample(const AmmSample& base) {
  const FeatureMap& f = base.feature;
  const BinaryMask& m = base.mask;
  const int h = f.height, w = f.width, ch = f.channels;
  std::vector<AmmSample> out;

  AmmSample flip{FeatureMap(h, w, ch), BinaryMask(h, w), base.confidence};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) flip.feature.at(y, w - 1 - x, c) = f.at(y, x, c);
      flip.mask.set(y, w - 1 - x, m.at(y, x));
    }
  }
  out.push_back(std::move(flip));

  constexpr int kShift = 2;
  AmmSample shift{FeatureMap(h, w, ch), BinaryMask(h, w), base.confidence};
  for (int y = kShift; y < h; ++y) {
    for (int x = kShift; x < w; ++x) {
      for (int c = 0; c < ch; ++c) shift.feature.at(y, x, c) = f.at(y - kShift, x - kShift, c);
      shift.mask.set(y, x, m.at(y - kShift, x - kShift));
    }
  }
  out.push_back(std::move(shift));

  // 3x3 box blur, zero outside; the mask is unchanged
  AmmSample blur{FeatureMap(h, w, ch), m, base.confidence};
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (int c = 0; c < ch; ++c) {
        double s = 0.0;
        for (int dy = -1; dy <= 1; ++dy) {
          for (int dx = -1; dx <= 1; ++dx) {
            const int yy = y + dy, xx = x + dx;
            if (yy >= 0 && yy < h && xx >= 0 && xx < w) s += f.at(yy, xx, c);
          }
        }
        blur.feature.at(y, x, c) = s / 9.0;
      }
    }
  }
  out.push_back(std::move(blur));
  return out;
}

namespace {

GlmMemory make_glm_memory(const QuerySpec& q, const PipelineConfig& cfg) {
  cfg.validate();
  if (q.mask.empty()) throw EmptyInputError("pipeline: query mask is empty");
  return GlmMemory(glm_make_static_sample(q.feature, q.mask, cfg.sample_resolution), cfg.capacity);
}

}  // namespace

Pipeline::Pipeline(const QuerySpec& query, const PipelineConfig& cfg)
    : cfg_(cfg),
      channels_(query.feature.channels),
      amm_(cfg.capacity, cfg.sample_resolution),
      glm_(make_glm_memory(query, cfg)),
      seg_(SegFilter::zeros(cfg.seg_kernel, query.feature.channels, cfg.label_channels, cfg.seg_regularizer)),
      track_(TrackFilter::zeros(cfg.track_kernel, query.feature.channels, cfg.track_regularizer)),
      amm_init_(cfg.capacity, cfg.sample_resolution),
      glm_init_(glm_),
      seg_init_(seg_),
      track_init_(track_) {
  AmmSample base = crop_sample(query.feature, query.mask, cfg_.sample_resolution, 1.0);
  std::vector<AmmSample> aug = augment_query_sample(base);
  amm_.update(std::move(base));
  for (auto& s : aug) amm_.update(std::move(s));

  const PseudoLabelEncoder enc{cfg_.label_channels};
  seg_ = steepest_descent(seg_, amm_, cfg_.amm_iters_init, enc, cfg_.reweighter, &init_seg_trace_);
  track_ = optimize_filter(track_, glm_, cfg_.glm_iters_init, cfg_.spatial_weight, &init_track_trace_);

  amm_init_ = amm_;
  glm_init_ = glm_;
  seg_init_ = seg_;
  track_init_ = track_;
}

SegmentationResult Pipeline::step_frame(const FeatureMap& frame_feature, int frame_index) {
  if (frame_feature.channels != channels_) throw DimensionError("step_frame: frame channel count differs from the query");
  if (frame_index < 0) throw ParameterError("step_frame: frame index must be non-negative");

  const ScoreMap hj = single_channel(conv2d(frame_feature, track_.kernel));
  const FeatureMap fa = conv2d(frame_feature, seg_.kernel);
  const FeatureMap fn = fuse(fa, encode_score(hj, cfg_.score_encoder));
  SegmentationResult result = extract_result(decode(fn, cfg_.decoder), frame_index, cfg_.mask_threshold);

  peaks_.push_back(std::max(0.0, hj.max_value()));
  results_.push_back(result);

  if (!halted_ && should_halt()) {
    halted_ = true;
    halt_frame_ = frame_index;
    amm_ = amm_init_;
    glm_ = glm_init_;
    seg_ = seg_init_;
    track_ = track_init_;
  }

  if (cfg_.updates_enabled && !halted_ && is_update_frame(frame_index, cfg_) &&
      amm_admit(result.prob, result.mask, cfg_.admit_threshold)) {
    update(frame_feature, result);
  }
  return result;
}

bool Pipeline::should_halt() const {
  const std::size_t w = static_cast<std::size_t>(cfg_.halt_window);
  if (results_.size() < w) return false;
  double sum = 0.0;
  for (std::size_t i = results_.size() - w; i < results_.size(); ++i) sum += results_[i].s_conf;
  return sum / static_cast<double>(w) < cfg_.halt_threshold;
}

void Pipeline::update(const FeatureMap& frame_feature, const SegmentationResult& result) {
  UpdateEvent ev;
  ev.frame_index = result.frame_index;

  amm_.update(crop_sample(frame_feature, result.mask, cfg_.sample_resolution, result.s_conf));
  const PseudoLabelEncoder enc{cfg_.label_channels};
  seg_ = steepest_descent(seg_, amm_, cfg_.amm_iters_update, enc, cfg_.reweighter, &ev.seg_trace);

  ev.source = glm_update_source(peaks_, cfg_.source_window, cfg_.source_high_ratio, cfg_.source_min_fraction);
  if (ev.source == UpdateSource::Dynamic) {
    glm_.push_dynamic(glm_make_dynamic_sample(frame_feature, *result.bbox, result.prob, cfg_.sample_resolution));
    track_ = optimize_filter(track_, glm_, cfg_.glm_iters_update, cfg_.spatial_weight, &ev.track_trace);
  } else {
    const TrackObjective obj({&glm_.static_entry()}, cfg_.spatial_weight, track_.regularizer);
    track_ = optimize_filter(track_, obj, cfg_.glm_iters_update, &ev.track_trace);
  }
  ev.amm_size = amm_.size();
  ev.glm_size = glm_.size();
  events_.push_back(std::move(ev));
}

TrackOutput Pipeline::finalize_2d() const {
  if (results_.empty()) throw EmptyInputError("finalize_2d: no frames were processed");
  TrackOutput out;
  out.results = results_;
  out.peaks = peaks_;
  std::vector<double> conf;
  conf.reserve(results_.size());
  for (const auto& r : results_) conf.push_back(r.s_conf);
  out.interval = temporal_localize(conf, cfg_.median_window, cfg_.temporal_ratio);
  return out;
}

TrackOutput track_video(const QuerySpec& query, std::span<const FeatureMap> frames, const PipelineConfig& cfg) {
  Pipeline p(query, cfg);
  const std::size_t clip = static_cast<std::size_t>(cfg.clip_length);
  for (std::size_t start = 0; start < frames.size(); start += clip) {
    const std::size_t end = std::min(frames.size(), start + clip);
    for (std::size_t i = start; i < end; ++i) p.step_frame(frames[i], static_cast<int>(i));
  }
  return p.finalize_2d();
}

std::optional<std::pair<int, int>> response_pixel(const SegmentationResult& r) {
  const auto comps = connected_components(r.mask);
  if (comps.empty()) return std::nullopt;
  const std::vector<Pixel>* best = &comps.front();
  for (const auto& c : comps) {
    if (c.size() > best->size()) best = &c;
  }
  double sr = 0.0, sc = 0.0;
  for (const Pixel& p : *best) {
    sr += p.row;
    sc += p.col;
  }
  const double n = static_cast<double>(best->size());
  return std::make_pair(static_cast<int>(std::lround(sc / n)), static_cast<int>(std::lround(sr / n)));
}

TrackOutput finalize_3d(const TrackOutput& track, std::span<const CameraFrame> cameras,
                        std::span<const AlignmentPair> alignment_pairs, const Geo3dOptions& opt) {
  if (!track.interval) throw NoDetectionError("finalize_3d: the track has no temporal interval");
  if (cameras.size() != track.results.size()) {
    throw DimensionError("finalize_3d: camera count differs from the number of tracked frames");
  }
  const Sim3Transform align = align_sim3(alignment_pairs);

  std::vector<ViewContribution> views;
  for (const auto& r : track.results) {
    if (!track.interval->contains(r.frame_index) || !r.bbox) continue;
    const auto px = response_pixel(r);
    const CameraFrame& cam = cameras[static_cast<std::size_t>(r.frame_index)];
    const auto [u, v] = *px;
    if (v < 0 || u < 0 || v >= cam.depth.height || u >= cam.depth.width || !(cam.depth.at(v, u) > 0.0)) continue;
    const Eigen::Vector3d p = backproject(cam, u, v, align);
    const double s = semantic_confidence(r.prob, r.mask, opt.lambda_thr, opt.weights);
    const double g = geometric_confidence(cam.depth_uncertainty.at(v, u), opt.zeta);
    views.push_back(ViewContribution::make(p, s, g, r.frame_index));
  }
  if (views.empty()) throw NoDetectionError("finalize_3d: no interval frame has a usable depth sample");

  TrackOutput out = track;
  out.world_point = aggregate(views);
  out.displacements.clear();
  for (const auto& v : views) {
    out.displacements.push_back(
        {v.frame_index, relative_displacement(cameras[static_cast<std::size_t>(v.frame_index)], *out.world_point, align)});
  }
  return out;
}

}  // namespace eagle
