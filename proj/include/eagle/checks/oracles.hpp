#pragma once

#include <functional>
#include <random>
#include <span>
#include <vector>

#include <Eigen/Core>

#include "eagle/amm.hpp"
#include "eagle/geo3d.hpp"
#include "eagle/glm.hpp"
#include "eagle/mask_ops.hpp"
#include "eagle/tensor.hpp"

// Reference implementations written independently of the library code paths:
// direct loops, dense linear algebra and brute-force scans.
namespace eagle::oracle {

/// Direct cross-correlation with an explicit bounds test per tap.
FeatureMap naive_conv2d(const FeatureMap& x, const ConvKernel& k);

/// Dense matrix A with A * vec(kernel) = vec(conv2d(x, kernel)), rows in
/// (y, x, c_out) order, columns in kernel storage order.
Eigen::MatrixXd conv_matrix(const FeatureMap& x, KernelShape shape);

/// Scalar-loop weighted ridge loss of the segmentation objective.
double seg_loss(const ConvKernel& sigma, std::span<const AmmSample> samples, const PseudoLabelEncoder& enc,
                const TargetReweighter& rw, double delta);

/// Scalar-loop tracking loss (hinge residual, spatial weights, ridge).
double track_loss(const ConvKernel& c, std::span<const GlmSample> samples, const SpatialWeightFn& fn, double lambda);

/// Closed-form ridge minimizer of the segmentation objective via the normal equations.
ConvKernel seg_normal_equations(std::span<const AmmSample> samples, KernelShape shape, const PseudoLabelEncoder& enc,
                                const TargetReweighter& rw, double delta);

/// Closed-form minimizer of the tracking objective when every S is 1 (pure least squares).
ConvKernel track_normal_equations(std::span<const GlmSample> samples, int k, const SpatialWeightFn& fn, double lambda);

/// Central finite-difference gradient of f at x.
ConvKernel central_difference(const std::function<double(const ConvKernel&)>& f, const ConvKernel& x, double h = 1e-6);

/// Relative error ||a - b|| / max(||b||, floor).
double relative_error(std::span<const double> a, std::span<const double> b, double floor = 1e-12);

/// Components by depth-first flood fill, each sorted, ordered by first pixel.
std::vector<std::vector<Pixel>> flood_fill_components(const BinaryMask& mask);

/// Median filter by sorting each (symmetrically shrunk) window.
std::vector<double> sort_median(std::span<const double> seq, int window);

/// Foreground pixels with a background or out-of-image 4-neighbour.
BinaryMask neighbor_scan_boundary(const BinaryMask& mask);

/// Non-separable Gaussian blur, kernel renormalized over in-image taps.
ScoreMap direct_gaussian_blur(const ScoreMap& src, double sigma);

/// Fraction of a window lying outside the image, by counting sub-cells of size
/// 1/subdiv. Exact when x0, y0 and side are multiples of 1/subdiv.
double counted_padded_fraction(double x0, double y0, double side, int height, int width, int subdiv);

/// Best point of an n-sample uniform scan of f over [lo, hi].
struct ScanResult {
  double argmin = 0.0;
  double min = 0.0;
};
ScanResult line_scan(const std::function<double(double)>& f, double lo, double hi, int n);

/// Random helpers shared by the checks.
/// Doubles T until f(T) > f(0), scans [0, T] with n points, then rescans the
/// cell around the best point.
ScanResult bracketed_scan(const std::function<double(double)>& f, int n);

std::vector<AmmSample> random_amm_samples(std::mt19937_64& rng, int n, int h, int w, int c);
ScoreMap random_region(std::mt19937_64& rng, int h, int w, bool all_ones);
/// Gaussian labels at random centres; the first sample is marked static.
std::vector<GlmSample> random_glm_samples(std::mt19937_64& rng, int n, int h, int w, int c, bool all_ones);
Sim3Transform random_sim3(std::mt19937_64& rng);
/// Focal lengths in [100, 1000], depths in [0.5, 20], zero uncertainty.
CameraFrame random_camera(std::mt19937_64& rng, int h = 48, int w = 64);

FeatureMap random_feature(std::mt19937_64& rng, int h, int w, int c, double sd = 1.0);
ConvKernel random_kernel(std::mt19937_64& rng, KernelShape shape, double sd = 1.0);
BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p = 0.4);
Eigen::Matrix3d random_rotation(std::mt19937_64& rng);

}  // namespace eagle::oracle
