#pragma once

#include <deque>
#include <optional>
#include <vector>

#include "eagle/crop.hpp"
#include "eagle/tensor.hpp"

namespace eagle {

/// Fixed mask -> multi-channel label transform.
///   channel 0: the mask itself
///   channel 1: foreground pixels with at least one background 4-neighbour
///   channel 2: exp(-d^2 / (2 r^2)) around the mask centroid, r = max(1, sqrt(area) / 2),
///              zero on background
struct PseudoLabelEncoder {
  int out_channels = 3;
};

FeatureMap encode_pseudo_label(const BinaryMask& mask, const PseudoLabelEncoder& enc = {});

/// Per-pixel loss weights: background + (foreground - background) * blur(mask).
struct TargetReweighter {
  double foreground_weight = 1.0;
  double background_weight = 0.25;
  double blur_sigma = 1.0;

  void validate() const;
};

ScoreMap reweight(const BinaryMask& mask, const TargetReweighter& rw = {});

/// Separable Gaussian blur, radius ceil(3 sigma), weights renormalized over
/// the taps that fall inside the image. sigma == 0 returns the input.
ScoreMap gaussian_blur(const ScoreMap& src, double sigma);

struct AmmSample {
  FeatureMap feature;
  BinaryMask mask;
  double confidence = 1.0;
};

/// FIFO sample bank. Every entry, the initial query included, is evictable.
class AmmMemory {
 public:
  explicit AmmMemory(int capacity = 50, int resolution = 32);

  /// Appends, evicting the oldest entry once capacity is exceeded. Throws
  /// DimensionError if the sample is not resolution x resolution.
  void update(AmmSample sample);
  void clear() { entries_.clear(); }

  const std::deque<AmmSample>& entries() const { return entries_; }
  std::size_t size() const { return entries_.size(); }
  int capacity() const { return capacity_; }
  int resolution() const { return resolution_; }

 private:
  int capacity_;
  int resolution_;
  std::deque<AmmSample> entries_;
};

inline void amm_update(AmmMemory& mem, AmmSample sample) { mem.update(std::move(sample)); }

struct SegFilter {
  ConvKernel kernel;
  double regularizer = 0.01;

  static SegFilter zeros(int k, int in_channels, int out_channels, double regularizer = 0.01);
};

struct DescentTrace;
struct SegFilter;

/// The weighted ridge objective
///   0.5 * sum_i || W_i (.) (F_i * sigma - QM_i) ||^2 + 0.5 * delta * ||sigma||^2
/// with labels and weights precomputed from the samples. Holds pointers into
/// the samples, which must outlive it.
class SegObjective {
 public:
  SegObjective(std::vector<const AmmSample*> samples, const PseudoLabelEncoder& enc, const TargetReweighter& rw,
               double regularizer);
  SegObjective(const AmmMemory& mem, const PseudoLabelEncoder& enc, const TargetReweighter& rw, double regularizer);

  double loss(const ConvKernel& sigma) const;
  ConvKernel gradient(const ConvKernel& sigma) const;

  /// sum_i ||W_i (.) (F_i * g)||^2 + delta ||g||^2, the curvature along g.
  double curvature(const ConvKernel& g) const;

  /// Exact minimizer of lambda -> loss(sigma - lambda g); nullopt when g == 0.
  std::optional<double> step_size(const ConvKernel& g) const;

  std::size_t size() const { return terms_.size(); }
  double regularizer() const { return delta_; }

 private:
  struct Term {
    const FeatureMap* feature;
    FeatureMap label;
    std::vector<double> weight_sq;  // per pixel
  };
  std::vector<Term> terms_;
  double delta_;

  friend SegFilter steepest_descent(const SegFilter&, const SegObjective&, int, DescentTrace*);
};

double seg_loss(const SegFilter& sigma, const AmmMemory& mem, const PseudoLabelEncoder& enc = {},
                const TargetReweighter& rw = {});
ConvKernel seg_gradient(const SegFilter& sigma, const AmmMemory& mem, const PseudoLabelEncoder& enc = {},
                        const TargetReweighter& rw = {});

/// ||g||^2 / (sum_i ||W_i (.) (F_i * g)||^2 + delta ||g||^2). `regularizer` may
/// be zero here; returns nullopt for a zero gradient.
std::optional<double> steepest_step_size(const ConvKernel& g, const AmmMemory& mem, const TargetReweighter& rw,
                                         double regularizer);

struct DescentTrace {
  std::vector<double> losses;  // losses[0] is the starting loss
  int iterations = 0;
  bool converged = false;  // stopped early on a vanishing gradient
};

/// Gradient below this norm ends the descent early.
inline constexpr double kGradientTolerance = 1e-12;

/// n_iter steps of steepest descent with the exact quadratic line search.
/// A step that would raise the loss (possible only at rounding level near the
/// optimum) is rejected and the descent stops.
SegFilter steepest_descent(const SegFilter& init, const SegObjective& objective, int n_iter,
                           DescentTrace* trace = nullptr);
SegFilter steepest_descent(const SegFilter& init, const AmmMemory& mem, int n_iter, const PseudoLabelEncoder& enc = {},
                           const TargetReweighter& rw = {}, DescentTrace* trace = nullptr);

/// True iff the mask is non-empty and the mean probability over it is >= threshold.
bool amm_admit(const ScoreMap& prob, const BinaryMask& mask, double threshold = 0.6);

/// Centroid-centered square crop (see mask_crop_window), resampled to res x res.
AmmSample crop_sample(const FeatureMap& frame_feature, const BinaryMask& mask, int resolution = 32,
                      double confidence = 1.0);

}  // namespace eagle
