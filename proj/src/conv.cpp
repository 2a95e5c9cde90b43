#include "eagle/conv.hpp"

#include <algorithm>
#include <string>

#include "eagle/errors.hpp"

namespace eagle {

namespace {

// Valid tap range for output coordinate `p`: taps t with 0 <= p + t - r < n.
inline void tap_range(int p, int r, int n, int k, int& lo, int& hi) {
  lo = std::max(0, r - p);
  hi = std::min(k, n + r - p);
}

}  // namespace

FeatureMap conv2d(const FeatureMap& x, const ConvKernel& k) {
  if (x.channels != k.in_channels) {
    throw DimensionError("conv2d: input has " + std::to_string(x.channels) + " channels, kernel expects " +
                         std::to_string(k.in_channels));
  }
  const int r = k.k / 2;
  const int cin = k.in_channels;
  const int cout = k.out_channels;
  FeatureMap out(x.height, x.width, cout);
  for (int y = 0; y < x.height; ++y) {
    int ky0, ky1;
    tap_range(y, r, x.height, k.k, ky0, ky1);
    for (int xx = 0; xx < x.width; ++xx) {
      int kx0, kx1;
      tap_range(xx, r, x.width, k.k, kx0, kx1);
      double* o = &out.data[out.index(y, xx, 0)];
      for (int ky = ky0; ky < ky1; ++ky) {
        for (int kx = kx0; kx < kx1; ++kx) {
          const double* in = &x.data[x.index(y + ky - r, xx + kx - r, 0)];
          const double* w = &k.data[k.index(ky, kx, 0, 0)];
          for (int ci = 0; ci < cin; ++ci) {
            const double v = in[ci];
            const double* wr = w + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) o[co] += v * wr[co];
          }
        }
      }
    }
  }
  return out;
}

FeatureMap conv2d_transpose(const FeatureMap& y, const ConvKernel& k) {
  if (y.channels != k.out_channels) {
    throw DimensionError("conv2d_transpose: input has " + std::to_string(y.channels) +
                         " channels, kernel produces " + std::to_string(k.out_channels));
  }
  const int r = k.k / 2;
  const int cin = k.in_channels;
  const int cout = k.out_channels;
  FeatureMap out(y.height, y.width, cin);
  for (int py = 0; py < y.height; ++py) {
    int ky0, ky1;
    tap_range(py, r, y.height, k.k, ky0, ky1);
    for (int px = 0; px < y.width; ++px) {
      int kx0, kx1;
      tap_range(px, r, y.width, k.k, kx0, kx1);
      const double* g = &y.data[y.index(py, px, 0)];
      for (int ky = ky0; ky < ky1; ++ky) {
        for (int kx = kx0; kx < kx1; ++kx) {
          double* o = &out.data[out.index(py + ky - r, px + kx - r, 0)];
          const double* w = &k.data[k.index(ky, kx, 0, 0)];
          for (int ci = 0; ci < cin; ++ci) {
            const double* wr = w + static_cast<std::size_t>(ci) * cout;
            double acc = 0.0;
            for (int co = 0; co < cout; ++co) acc += g[co] * wr[co];
            o[ci] += acc;
          }
        }
      }
    }
  }
  return out;
}

ConvKernel kernel_gradient(const FeatureMap& x, const FeatureMap& residual, KernelShape shape) {
  validate_kernel_shape(shape);
  if (x.channels != shape.in_channels) {
    throw DimensionError("kernel_gradient: input channels do not match kernel shape");
  }
  if (residual.height != x.height || residual.width != x.width || residual.channels != shape.out_channels) {
    throw DimensionError("kernel_gradient: residual shape does not match conv2d output");
  }
  const int r = shape.k / 2;
  const int cin = shape.in_channels;
  const int cout = shape.out_channels;
  ConvKernel grad(shape);
  for (int py = 0; py < x.height; ++py) {
    int ky0, ky1;
    tap_range(py, r, x.height, shape.k, ky0, ky1);
    for (int px = 0; px < x.width; ++px) {
      int kx0, kx1;
      tap_range(px, r, x.width, shape.k, kx0, kx1);
      const double* res = &residual.data[residual.index(py, px, 0)];
      for (int ky = ky0; ky < ky1; ++ky) {
        for (int kx = kx0; kx < kx1; ++kx) {
          const double* in = &x.data[x.index(py + ky - r, px + kx - r, 0)];
          double* g = &grad.data[grad.index(ky, kx, 0, 0)];
          for (int ci = 0; ci < cin; ++ci) {
            const double v = in[ci];
            double* gr = g + static_cast<std::size_t>(ci) * cout;
            for (int co = 0; co < cout; ++co) gr[co] += v * res[co];
          }
        }
      }
    }
  }
  return grad;
}

ConvKernel kernel_gradient(const FeatureMap& x, const ScoreMap& residual, KernelShape shape) {
  if (shape.out_channels != 1) throw DimensionError("kernel_gradient: score-map residual needs one output channel");
  if (!residual.same_dims(x.height, x.width)) {
    throw DimensionError("kernel_gradient: residual shape does not match conv2d output");
  }
  FeatureMap as_map(residual.height, residual.width, 1, residual.data);
  return kernel_gradient(x, as_map, shape);
}

}  // namespace eagle
