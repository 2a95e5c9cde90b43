#pragma once

#include "eagle/tensor.hpp"

namespace eagle {

// All three operators use zero same-padding and cross-correlation indexing:
//   out[y, x, co] = sum_{ky, kx, ci} in[y + ky - r, x + kx - r, ci] * k[ky, kx, ci, co],  r = k / 2.

/// Output keeps the input's height/width and has k.out_channels channels.
FeatureMap conv2d(const FeatureMap& x, const ConvKernel& k);

/// Adjoint of conv2d in its first argument: <conv2d(a, k), b> == <a, conv2d_transpose(b, k)>.
FeatureMap conv2d_transpose(const FeatureMap& y, const ConvKernel& k);

/// Gradient of 0.5 * ||conv2d(x, k) - target||^2 with respect to k, given
/// residual = conv2d(x, k) - target. This is the adjoint of conv2d in its kernel argument.
ConvKernel kernel_gradient(const FeatureMap& x, const FeatureMap& residual, KernelShape shape);

/// Single-output-channel convenience: the residual is a score map.
ConvKernel kernel_gradient(const FeatureMap& x, const ScoreMap& residual, KernelShape shape);

}  // namespace eagle
