#pragma once

#include <deque>
#include <optional>
#include <span>
#include <vector>

#include "eagle/mask_ops.hpp"
#include "eagle/tensor.hpp"

namespace eagle {

/// sw_G = w_bg + (w_fg - w_bg) * G.
struct SpatialWeightFn {
  double w_fg = 1.0;
  double w_bg = 0.25;

  void validate() const;
};

ScoreMap spatial_weight(const ScoreMap& label, const SpatialWeightFn& fn = {});

enum class SnapshotKind { Static, Dynamic };

struct GlmSample {
  FeatureMap feature;
  ScoreMap label;          // Gaussian G
  ScoreMap target_region;  // S in [0, 1]
  SnapshotKind kind = SnapshotKind::Dynamic;

  /// Throws DimensionError / ParameterError when maps disagree or S leaves [0, 1].
  void validate() const;
};

/// One permanent static snapshot plus a FIFO of dynamic snapshots. The total
/// size, static entry included, never exceeds capacity.
class GlmMemory {
 public:
  explicit GlmMemory(GlmSample static_entry, int capacity = 50);

  void push_dynamic(GlmSample sample);
  void clear_dynamic() { dynamic_.clear(); }

  const GlmSample& static_entry() const { return static_; }
  const std::deque<GlmSample>& dynamic_entries() const { return dynamic_; }
  std::size_t size() const { return 1 + dynamic_.size(); }
  int capacity() const { return capacity_; }

  /// Static entry first, then dynamic entries oldest to newest.
  std::vector<const GlmSample*> all() const;

 private:
  GlmSample static_;
  std::deque<GlmSample> dynamic_;
  int capacity_;
};

struct TrackFilter {
  ConvKernel kernel;
  double regularizer = 0.1;

  static TrackFilter zeros(int k, int in_channels, double regularizer = 0.1);
};

/// sw_G (.) (S (.) H_J + (1 - S) (.) max(0, H_J) - G), pointwise.
ScoreMap track_residual(const ScoreMap& response, const GlmSample& sample, const SpatialWeightFn& fn = {});

/// Q_G = sw_G (.) (S + (1 - S) (.) 1[H_J > 0]): the pointwise derivative of the residual w.r.t. H_J.
ScoreMap residual_derivative(const ScoreMap& response, const GlmSample& sample, const SpatialWeightFn& fn = {});

/// L(c) = (1/|O|) sum ||H||^2 + lambda^2 ||c||^2 over the given snapshots.
class TrackObjective {
 public:
  TrackObjective(std::vector<const GlmSample*> samples, const SpatialWeightFn& fn, double regularizer);

  double loss(const ConvKernel& c) const;
  ConvKernel gradient(const ConvKernel& c) const;

  /// Gauss-Newton curvature product (J^T J) v at c, matrix-free:
  /// (2/|O|) sum F *^T (Q_G^2 (.) (F * v)) + 2 lambda^2 v.
  ConvKernel gauss_newton_product(const ConvKernel& c, const ConvKernel& v) const;

  /// v^T (J^T J) v at c, i.e. (2/|O|) sum ||Q_G (.) (F * v)||^2 + 2 lambda^2 ||v||^2.
  double gauss_newton_quadratic(const ConvKernel& c, const ConvKernel& v) const;

  std::size_t size() const { return samples_.size(); }
  double regularizer() const { return lambda_; }
  const std::vector<const GlmSample*>& samples() const { return samples_; }

  // Per-snapshot pieces evaluated at a given response map H_J = F_i * c.
  ScoreMap response(std::size_t i, const ConvKernel& c) const;
  double residual_norm_sq(std::size_t i, const ScoreMap& response) const;
  /// Q_G (.) H, the vector backprojected by the gradient.
  ScoreMap weighted_residual(std::size_t i, const ScoreMap& response) const;
  ScoreMap derivative(std::size_t i, const ScoreMap& response) const;

 private:
  std::vector<const GlmSample*> samples_;
  std::vector<ScoreMap> weights_;  // sw_G per sample
  double lambda_;
};

double track_loss(const TrackFilter& c, const GlmMemory& mem, const SpatialWeightFn& fn = {});
ConvKernel track_gradient(const TrackFilter& c, const GlmMemory& mem, const SpatialWeightFn& fn = {});

struct GaussNewtonStep {
  ConvKernel direction;  // the gradient; the update is c - beta * direction
  double beta = 0.0;
};

/// beta = g^T g / (g^T (J^T J) g). nullopt when the gradient vanishes.
std::optional<GaussNewtonStep> gauss_newton_step(const ConvKernel& c, const TrackObjective& objective);
std::optional<GaussNewtonStep> gauss_newton_step(const TrackFilter& c, const GlmMemory& mem,
                                                 const SpatialWeightFn& fn = {});

struct OptimizeTrace {
  std::vector<double> losses;  // losses[0] is the starting loss
  int iterations = 0;
  int halvings = 0;
  bool converged = false;
};

inline constexpr int kMaxStepHalvings = 8;

/// Gauss-Newton-scaled gradient steps. When a step raises the loss (the hinge
/// pattern changed), beta is halved up to kMaxStepHalvings times; if none of
/// those helps the optimization stops, so the loss never increases.
TrackFilter optimize_filter(const TrackFilter& init, const TrackObjective& objective, int n_iter,
                            OptimizeTrace* trace = nullptr);
TrackFilter optimize_filter(const TrackFilter& init, const GlmMemory& mem, int n_iter, const SpatialWeightFn& fn = {},
                            OptimizeTrace* trace = nullptr);

/// Gaussian label width in source pixels for a crop of the given side.
inline double glm_label_sigma(double crop_side) { return crop_side / 6.0; }

/// Crop of 1.5x the bbox side around the bbox center (zero padded), resized to
/// res x res; label is a Gaussian at the crop center, S is the cropped probability map.
GlmSample glm_make_dynamic_sample(const FeatureMap& frame_feature, const BBox& bbox, const ScoreMap& prob,
                                  int resolution = 32);

/// Same crop geometry for the query, with S taken from the query mask.
GlmSample glm_make_static_sample(const FeatureMap& query_feature, const BinaryMask& query_mask, int resolution = 32);

enum class UpdateSource { Static, Dynamic };

/// Over the last `window` entries, a frame is "high" when its peak is at least
/// high_ratio times the running maximum observed up to that frame. Dynamic iff
/// the high fraction is strictly above min_fraction.
UpdateSource glm_update_source(std::span<const double> peaks, int window = 25, double high_ratio = 0.5,
                               double min_fraction = 0.6);

}  // namespace eagle
