#include "eagle/checks/oracles.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Geometry>

#include "eagle/errors.hpp"
#include "eagle/signal.hpp"

namespace eagle::oracle {

FeatureMap naive_conv2d(const FeatureMap& x, const ConvKernel& k) {
  FeatureMap out(x.height, x.width, k.out_channels);
  const int r = k.k / 2;
  for (int y = 0; y < x.height; ++y) {
    for (int xx = 0; xx < x.width; ++xx) {
      for (int co = 0; co < k.out_channels; ++co) {
        double s = 0.0;
        for (int ky = 0; ky < k.k; ++ky) {
          for (int kx = 0; kx < k.k; ++kx) {
            const int sy = y + ky - r, sx = xx + kx - r;
            if (sy < 0 || sy >= x.height || sx < 0 || sx >= x.width) continue;
            for (int ci = 0; ci < k.in_channels; ++ci) s += x.at(sy, sx, ci) * k.at(ky, kx, ci, co);
          }
        }
        out.at(y, xx, co) = s;
      }
    }
  }
  return out;
}

Eigen::MatrixXd conv_matrix(const FeatureMap& x, KernelShape shape) {
  const ConvKernel probe(shape);
  const Eigen::Index rows = static_cast<Eigen::Index>(x.height) * x.width * shape.out_channels;
  const Eigen::Index cols = static_cast<Eigen::Index>(probe.data.size());
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(rows, cols);
  // Column j is the response to the j-th unit kernel.
  for (Eigen::Index j = 0; j < cols; ++j) {
    ConvKernel unit(shape);
    unit.data[static_cast<std::size_t>(j)] = 1.0;
    const FeatureMap resp = naive_conv2d(x, unit);
    for (Eigen::Index i = 0; i < rows; ++i) a(i, j) = resp.data[static_cast<std::size_t>(i)];
  }
  return a;
}

double seg_loss(const ConvKernel& sigma, std::span<const AmmSample> samples, const PseudoLabelEncoder& enc,
                const TargetReweighter& rw, double delta) {
  double total = 0.0;
  for (const auto& s : samples) {
    const FeatureMap pred = naive_conv2d(s.feature, sigma);
    const FeatureMap label = encode_pseudo_label(s.mask, enc);
    const ScoreMap w = reweight(s.mask, rw);
    for (int y = 0; y < pred.height; ++y) {
      for (int x = 0; x < pred.width; ++x) {
        for (int c = 0; c < pred.channels; ++c) {
          const double d = w.at(y, x) * (pred.at(y, x, c) - label.at(y, x, c));
          total += 0.5 * d * d;
        }
      }
    }
  }
  double reg = 0.0;
  for (double v : sigma.data) reg += v * v;
  return total + 0.5 * delta * reg;
}

double track_loss(const ConvKernel& c, std::span<const GlmSample> samples, const SpatialWeightFn& fn, double lambda) {
  double total = 0.0;
  for (const auto& s : samples) {
    const FeatureMap h = naive_conv2d(s.feature, c);
    for (int y = 0; y < h.height; ++y) {
      for (int x = 0; x < h.width; ++x) {
        const double hj = h.at(y, x, 0);
        const double g = s.label.at(y, x);
        const double sr = s.target_region.at(y, x);
        const double sw = fn.w_bg + (fn.w_fg - fn.w_bg) * g;
        const double r = sw * (sr * hj + (1.0 - sr) * std::max(0.0, hj) - g);
        total += r * r;
      }
    }
  }
  double reg = 0.0;
  for (double v : c.data) reg += v * v;
  return total / static_cast<double>(samples.size()) + lambda * lambda * reg;
}

ConvKernel seg_normal_equations(std::span<const AmmSample> samples, KernelShape shape, const PseudoLabelEncoder& enc,
                                const TargetReweighter& rw, double delta) {
  const ConvKernel probe(shape);
  const Eigen::Index n = static_cast<Eigen::Index>(probe.data.size());
  Eigen::MatrixXd lhs = delta * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& s : samples) {
    const Eigen::MatrixXd a = conv_matrix(s.feature, shape);
    const FeatureMap label = encode_pseudo_label(s.mask, enc);
    const ScoreMap w = reweight(s.mask, rw);
    Eigen::VectorXd d(a.rows()), y(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double wi = w.data[static_cast<std::size_t>(i / shape.out_channels)];
      d(i) = wi * wi;
      y(i) = label.data[static_cast<std::size_t>(i)];
    }
    lhs += a.transpose() * d.asDiagonal() * a;
    rhs += a.transpose() * d.asDiagonal() * y;
  }
  const Eigen::VectorXd sol = lhs.ldlt().solve(rhs);
  return ConvKernel(shape, std::vector<double>(sol.data(), sol.data() + sol.size()));
}

ConvKernel track_normal_equations(std::span<const GlmSample> samples, int k, const SpatialWeightFn& fn, double lambda) {
  if (samples.empty()) throw EmptyInputError("track_normal_equations: no samples");
  const KernelShape shape{k, samples.front().feature.channels, 1};
  const ConvKernel probe(shape);
  const Eigen::Index n = static_cast<Eigen::Index>(probe.data.size());
  const double inv = 1.0 / static_cast<double>(samples.size());
  Eigen::MatrixXd lhs = lambda * lambda * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd rhs = Eigen::VectorXd::Zero(n);
  for (const auto& s : samples) {
    const Eigen::MatrixXd a = conv_matrix(s.feature, shape);
    Eigen::VectorXd d(a.rows()), g(a.rows());
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      const double gi = s.label.data[static_cast<std::size_t>(i)];
      const double sw = fn.w_bg + (fn.w_fg - fn.w_bg) * gi;
      d(i) = sw * sw;
      g(i) = gi;
    }
    lhs += inv * a.transpose() * d.asDiagonal() * a;
    rhs += inv * a.transpose() * d.asDiagonal() * g;
  }
  const Eigen::VectorXd sol = lhs.ldlt().solve(rhs);
  return ConvKernel(shape, std::vector<double>(sol.data(), sol.data() + sol.size()));
}

ConvKernel central_difference(const std::function<double(const ConvKernel&)>& f, const ConvKernel& x, double h) {
  ConvKernel g(x.shape());
  ConvKernel probe = x;
  for (std::size_t i = 0; i < x.data.size(); ++i) {
    probe.data[i] = x.data[i] + h;
    const double up = f(probe);
    probe.data[i] = x.data[i] - h;
    const double down = f(probe);
    probe.data[i] = x.data[i];
    g.data[i] = (up - down) / (2.0 * h);
  }
  return g;
}

double relative_error(std::span<const double> a, std::span<const double> b, double floor) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), floor);
}

std::vector<std::vector<Pixel>> flood_fill_components(const BinaryMask& mask) {
  std::vector<int> label(mask.data.size(), -1);
  std::vector<std::vector<Pixel>> comps;
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x) || label[mask.index(y, x)] >= 0) continue;
      const int id = static_cast<int>(comps.size());
      comps.emplace_back();
      std::vector<Pixel> stack{{y, x}};
      label[mask.index(y, x)] = id;
      while (!stack.empty()) {
        const Pixel p = stack.back();
        stack.pop_back();
        comps[static_cast<std::size_t>(id)].push_back(p);
        const int dy[4] = {-1, 1, 0, 0};
        const int dx[4] = {0, 0, -1, 1};
        for (int d = 0; d < 4; ++d) {
          const int ny = p.row + dy[d], nx = p.col + dx[d];
          if (ny < 0 || ny >= mask.height || nx < 0 || nx >= mask.width) continue;
          if (!mask.at(ny, nx) || label[mask.index(ny, nx)] >= 0) continue;
          label[mask.index(ny, nx)] = id;
          stack.push_back({ny, nx});
        }
      }
      std::sort(comps.back().begin(), comps.back().end());
    }
  }
  return comps;
}

std::vector<double> sort_median(std::span<const double> seq, int window) {
  const int n = static_cast<int>(seq.size());
  const int half = window / 2;
  std::vector<double> out;
  for (int i = 0; i < n; ++i) {
    const int r = std::min({half, i, n - 1 - i});
    std::vector<double> w(seq.begin() + (i - r), seq.begin() + (i + r + 1));
    std::sort(w.begin(), w.end());
    out.push_back(w[w.size() / 2]);
  }
  return out;
}

BinaryMask neighbor_scan_boundary(const BinaryMask& mask) {
  BinaryMask out(mask.height, mask.width);
  for (int y = 0; y < mask.height; ++y) {
    for (int x = 0; x < mask.width; ++x) {
      if (!mask.at(y, x)) continue;
      const bool edge = y == 0 || x == 0 || y == mask.height - 1 || x == mask.width - 1 || !mask.at(y - 1, x) ||
                        !mask.at(y + 1, x) || !mask.at(y, x - 1) || !mask.at(y, x + 1);
      out.set(y, x, edge);
    }
  }
  return out;
}

ScoreMap direct_gaussian_blur(const ScoreMap& src, double sigma) {
  if (sigma == 0.0) return src;
  const int r = static_cast<int>(std::ceil(3.0 * sigma));
  ScoreMap out(src.height, src.width);
  for (int y = 0; y < src.height; ++y) {
    for (int x = 0; x < src.width; ++x) {
      double num = 0.0, den = 0.0;
      for (int dy = -r; dy <= r; ++dy) {
        for (int dx = -r; dx <= r; ++dx) {
          const int sy = y + dy, sx = x + dx;
          if (sy < 0 || sy >= src.height || sx < 0 || sx >= src.width) continue;
          const double w = std::exp(-(dy * dy + dx * dx) / (2.0 * sigma * sigma));
          num += w * src.at(sy, sx);
          den += w;
        }
      }
      out.at(y, x) = num / den;
    }
  }
  return out;
}

double counted_padded_fraction(double x0, double y0, double side, int height, int width, int subdiv) {
  const long long cells = std::llround(side * subdiv);
  long long inside_x = 0, inside_y = 0;
  for (long long i = 0; i < cells; ++i) {
    const double cx = x0 + (static_cast<double>(i) + 0.5) / subdiv;
    const double cy = y0 + (static_cast<double>(i) + 0.5) / subdiv;
    if (cx >= 0.0 && cx < width) ++inside_x;
    if (cy >= 0.0 && cy < height) ++inside_y;
  }
  const double total = static_cast<double>(cells) * static_cast<double>(cells);
  return (total - static_cast<double>(inside_x) * static_cast<double>(inside_y)) / total;
}

ScanResult line_scan(const std::function<double(double)>& f, double lo, double hi, int n) {
  ScanResult best{lo, f(lo)};
  for (int i = 1; i < n; ++i) {
    const double t = lo + (hi - lo) * i / (n - 1);
    const double v = f(t);
    if (v < best.min) best = {t, v};
  }
  return best;
}

FeatureMap random_feature(std::mt19937_64& rng, int h, int w, int c, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  FeatureMap f(h, w, c);
  for (double& v : f.data) v = nd(rng);
  return f;
}

ConvKernel random_kernel(std::mt19937_64& rng, KernelShape shape, double sd) {
  std::normal_distribution<double> nd(0.0, sd);
  ConvKernel k(shape);
  for (double& v : k.data) v = nd(rng);
  return k;
}

BinaryMask random_mask(std::mt19937_64& rng, int h, int w, double p) {
  std::bernoulli_distribution b(p);
  BinaryMask m(h, w);
  for (auto& v : m.data) v = b(rng) ? 1 : 0;
  return m;
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  q.normalize();
  return q.toRotationMatrix();
}

std::vector<AmmSample> random_amm_samples(std::mt19937_64& rng, int n, int h, int w, int c) {
  std::vector<AmmSample> out;
  for (int i = 0; i < n; ++i) {
    out.push_back({random_feature(rng, h, w, c), random_mask(rng, h, w), 1.0});
  }
  return out;
}

// S mixes exact zeros, exact ones and fractions so every hinge branch is hit.
ScoreMap random_region(std::mt19937_64& rng, int h, int w, bool all_ones) {
  ScoreMap s(h, w, 1.0);
  if (all_ones) return s;
  std::uniform_int_distribution<int> kind(0, 2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double& v : s.data) {
    const int k = kind(rng);
    v = k == 0 ? 0.0 : k == 1 ? 1.0 : u(rng);
  }
  return s;
}

std::vector<GlmSample> random_glm_samples(std::mt19937_64& rng, int n, int h, int w, int c, bool all_ones) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<GlmSample> out;
  for (int i = 0; i < n; ++i) {
    GlmSample s;
    s.feature = random_feature(rng, h, w, c);
    s.label = gaussian_label(u(rng) * (h - 1), u(rng) * (w - 1), 0.5 + u(rng) * 1.5, h, w);
    s.target_region = random_region(rng, h, w, all_ones);
    s.kind = i == 0 ? SnapshotKind::Static : SnapshotKind::Dynamic;
    out.push_back(std::move(s));
  }
  return out;
}

ScanResult bracketed_scan(const std::function<double(double)>& f, int n) {
  const double f0 = f(0.0);
  double hi = 1e-6;
  while (f(hi) <= f0 && hi < 1e12) hi *= 2.0;
  ScanResult best = line_scan(f, 0.0, hi, n);
  const double step = hi / (n - 1);
  const ScanResult fine = line_scan(f, std::max(0.0, best.argmin - step), best.argmin + step, n);
  return fine.min < best.min ? fine : best;
}

Sim3Transform random_sim3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Sim3Transform s;
  s.scale = std::exp(u(rng));
  s.rotation = random_rotation(rng);
  s.translation = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 10.0;
  return s;
}

CameraFrame random_camera(std::mt19937_64& rng, int h, int w) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::uniform_real_distribution<double> f(100.0, 1000.0);
  std::uniform_real_distribution<double> d(0.5, 20.0);
  CameraFrame c;
  c.pose.topLeftCorner<3, 3>() = random_rotation(rng);
  c.pose.topRightCorner<3, 1>() = Eigen::Vector3d(u(rng), u(rng), u(rng)) * 5.0;
  const double fx = f(rng);
  c.intrinsics << fx, 0.0, w / 2.0 + u(rng), 0.0, f(rng), h / 2.0 + u(rng), 0.0, 0.0, 1.0;
  c.depth = ScoreMap(h, w);
  for (double& v : c.depth.data) v = d(rng);
  c.depth_uncertainty = ScoreMap(h, w, 0.0);
  return c;
}

}  // namespace eagle::oracle
