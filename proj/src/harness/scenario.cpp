#include "eagle/harness/scenario.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Geometry>

#include "eagle/errors.hpp"

namespace eagle::harness {

namespace {

constexpr double kFeatureQuantum = 1e-4;

// Independent generator streams per purpose, so adding frames does not
// perturb the signatures or the geometry.
std::mt19937_64 stream(std::uint64_t seed, std::uint64_t salt) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(salt)};
  return std::mt19937_64(seq);
}

double quantize(double v) { return std::round(v / kFeatureQuantum) * kFeatureQuantum; }

struct Square {
  int row = 0;
  int col = 0;
  int size = 0;
};

void paint(FeatureMap& f, const Square& sq, const Eigen::VectorXd& sig, double amplitude) {
  for (int y = std::max(0, sq.row); y < std::min(f.height, sq.row + sq.size); ++y) {
    for (int x = std::max(0, sq.col); x < std::min(f.width, sq.col + sq.size); ++x) {
      for (int c = 0; c < f.channels; ++c) f.at(y, x, c) += amplitude * sig(c);
    }
  }
}

BinaryMask square_mask(int h, int w, const Square& sq) {
  BinaryMask m(h, w);
  for (int y = std::max(0, sq.row); y < std::min(h, sq.row + sq.size); ++y) {
    for (int x = std::max(0, sq.col); x < std::min(w, sq.col + sq.size); ++x) m.set(y, x, true);
  }
  return m;
}

FeatureMap noise_map(std::mt19937_64& rng, int h, int w, int c, double sd) {
  FeatureMap f(h, w, c);
  if (sd > 0.0) {
    std::normal_distribution<double> nd(0.0, sd);
    for (double& v : f.data) v = nd(rng);
  }
  return f;
}

void quantize_all(FeatureMap& f) {
  for (double& v : f.data) v = quantize(v);
}

Square centered_square(const ScenarioParams& p) {
  return {(p.height - p.object_size) / 2, (p.width - p.object_size) / 2, p.object_size};
}

bool present(const ScenarioParams& p, int t) {
  if (p.presence.empty()) return true;
  return std::any_of(p.presence.begin(), p.presence.end(), [t](const TemporalInterval& iv) { return iv.contains(t); });
}

Eigen::Matrix3d random_rotation(std::mt19937_64& rng) {
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::Quaterniond q(nd(rng), nd(rng), nd(rng), nd(rng));
  q.normalize();
  return q.toRotationMatrix();
}

// Camera-to-world rotation whose optical axis (z) points from eye to target, y pointing down.
Eigen::Matrix3d look_at(const Eigen::Vector3d& eye, const Eigen::Vector3d& target) {
  const Eigen::Vector3d z = (target - eye).normalized();
  const Eigen::Vector3d down(0.0, 1.0, 0.0);
  Eigen::Vector3d x = down.cross(z).normalized();
  Eigen::Vector3d y = z.cross(x);
  Eigen::Matrix3d r;
  r.col(0) = x;
  r.col(1) = y;
  r.col(2) = z;
  return r;
}

void add_geometry(Scenario& s, const ScenarioParams& p, std::uint64_t seed) {
  auto rng = stream(seed, 3);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> scale_dist(0.5, 2.0);

  Sim3Transform gt;
  gt.scale = scale_dist(rng);
  gt.rotation = random_rotation(rng);
  gt.translation = Eigen::Vector3d(unit(rng), unit(rng), unit(rng)) * 5.0;

  const Eigen::Vector3d target_recon(unit(rng), unit(rng), unit(rng));
  s.gt_alignment = gt;
  s.gt_point = gt.apply(target_recon);

  const Square sq = centered_square(p);
  const double cx = sq.col + (sq.size - 1) / 2.0;
  const double cy = sq.row + (sq.size - 1) / 2.0;
  const int n = p.frames;
  for (int i = 0; i < n; ++i) {
    const double theta = n > 1 ? -p.arc / 2.0 + p.arc * i / (n - 1) : 0.0;
    const Eigen::Vector3d dir(std::sin(theta), -0.3, -std::cos(theta));
    const Eigen::Vector3d eye = target_recon + p.camera_distance * dir.normalized();

    CameraFrame cam;
    cam.pose.topLeftCorner<3, 3>() = look_at(eye, target_recon);
    cam.pose.topRightCorner<3, 1>() = eye;
    cam.intrinsics << p.focal, 0.0, cx, 0.0, p.focal, cy, 0.0, 0.0, 1.0;
    cam.depth = ScoreMap(p.height, p.width, p.camera_distance + p.background_depth_offset);
    cam.depth_uncertainty = ScoreMap(p.height, p.width, p.depth_uncertainty);
    const BinaryMask& m = s.gt_masks[static_cast<std::size_t>(i)];
    for (std::size_t k = 0; k < m.data.size(); ++k) {
      if (m.data[k]) cam.depth.data[k] = p.camera_distance;
    }
    if (i == p.corrupted_view) {
      for (double& d : cam.depth.data) d *= p.corrupted_depth_scale;
      for (double& u : cam.depth_uncertainty.data) u = p.corrupted_tau;
    }
    cam.pose_valid = i != p.invalid_pose_view;
    s.cameras.push_back(std::move(cam));
  }

  for (int k = 0; k < p.alignment_points; ++k) {
    const Eigen::Vector3d src = Eigen::Vector3d(unit(rng), unit(rng), unit(rng)) * 3.0;
    s.alignment_pairs.push_back({src, gt.apply(src)});
  }
}

}  // namespace

std::optional<Preset> parse_preset(std::string_view name) {
  if (name == "identity") return Preset::Identity;
  if (name == "drift") return Preset::Drift;
  if (name == "distractor") return Preset::Distractor;
  if (name == "absence") return Preset::Absence;
  if (name == "geo") return Preset::Geo;
  return std::nullopt;
}

std::string preset_name(Preset p) {
  switch (p) {
    case Preset::Identity: return "identity";
    case Preset::Drift: return "drift";
    case Preset::Distractor: return "distractor";
    case Preset::Absence: return "absence";
    case Preset::Geo: return "geo";
  }
  return "custom";
}

void ScenarioParams::validate() const {
  if (frames < 1) throw ParameterError("scenario: need at least one frame");
  if (height < 8 || width < 8) throw ParameterError("scenario: canvas must be at least 8x8");
  if (channels < 3) throw ParameterError("scenario: need at least 3 channels");
  if (object_size < 1 || object_size > std::min(height, width)) throw ParameterError("scenario: bad object size");
  if (!(noise >= 0.0) || !(amplitude > 0.0)) throw ParameterError("scenario: bad amplitude or noise");
  if (!(drift_rate >= 0.0)) throw ParameterError("scenario: drift rate must be non-negative");
  if (distractors < 0 || distractors > 2) throw ParameterError("scenario: at most 2 distractors");
  if (distractor_size < 1 || !(std::abs(distractor_similarity) <= 1.0)) {
    throw ParameterError("scenario: bad distractor parameters");
  }
  for (const auto& iv : presence) {
    if (iv.start_frame < 0 || iv.end_frame < iv.start_frame || iv.end_frame >= frames) {
      throw ParameterError("scenario: presence run outside the frame range");
    }
  }
  if (motion_period <= 0 || !(motion_amplitude >= 0.0)) throw ParameterError("scenario: bad motion parameters");
  if (geometry) {
    if (!(camera_distance > 0.0) || !(focal > 0.0) || !(depth_uncertainty >= 0.0) || !(corrupted_tau >= 0.0) ||
        !(corrupted_depth_scale > 0.0) || !(background_depth_offset >= 0.0)) {
      throw ParameterError("scenario: bad camera parameters");
    }
    if (alignment_points < 3) throw ParameterError("scenario: need at least 3 alignment points");
  }
}

ScenarioParams preset_params(Preset p) {
  ScenarioParams sp;
  switch (p) {
    case Preset::Identity:
      sp.frames = 60;
      sp.identical_frames = true;
      break;
    case Preset::Drift:
      sp.frames = 200;
      sp.drift_rate = std::numbers::pi / 2.0 / 150.0;
      break;
    case Preset::Distractor:
      sp.frames = 60;
      sp.distractors = 2;
      sp.motion_amplitude = 3.0;
      break;
    case Preset::Absence:
      sp.frames = 120;
      sp.presence = {{10, 39}, {80, 109}};
      break;
    case Preset::Geo:
      sp.frames = 5;
      sp.geometry = true;
      break;
  }
  return sp;
}

void Scenario::validate() const {
  const std::size_t n = frames.size();
  if (n == 0) throw ParameterError("scenario: no frames");
  if (gt_masks.size() != n || gt_boxes.size() != n) throw DimensionError("scenario: per-frame sequences differ in length");
  if (!cameras.empty() && cameras.size() != n) throw DimensionError("scenario: camera count differs from frame count");
  if (!query.feature.same_shape(FeatureMap(height, width, channels)) || !query.mask.same_dims(height, width)) {
    throw DimensionError("scenario: query size differs from the canvas");
  }
  if (query.mask.empty()) throw EmptyInputError("scenario: query mask is empty");
  for (std::size_t i = 0; i < n; ++i) {
    if (frames[i].height != height || frames[i].width != width || frames[i].channels != channels ||
        !gt_masks[i].same_dims(height, width)) {
      throw DimensionError("scenario: frame " + std::to_string(i) + " has the wrong size");
    }
  }
  if (gt_interval && (gt_interval->start_frame < 0 || gt_interval->end_frame < gt_interval->start_frame ||
                      gt_interval->end_frame >= static_cast<int>(n))) {
    throw ParameterError("scenario: ground-truth interval outside the frame range");
  }
  for (const auto& c : cameras) {
    c.validate();
    if (!c.depth.same_dims(height, width)) throw DimensionError("scenario: depth map size differs from the canvas");
  }
  if (gt_alignment) gt_alignment->validate();
}

Signatures make_signatures(std::uint64_t seed, int channels) {
  if (channels < 3) throw ParameterError("signatures need at least 3 channels");
  auto rng = stream(seed, 1);
  std::normal_distribution<double> nd(0.0, 1.0);
  Eigen::MatrixXd m(channels, 3);
  for (int j = 0; j < 3; ++j) {
    for (int i = 0; i < channels; ++i) m(i, j) = nd(rng);
  }
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(m);
  const Eigen::MatrixXd q = qr.householderQ() * Eigen::MatrixXd::Identity(channels, 3);
  return {q.col(0), q.col(1), q.col(2)};
}

Eigen::VectorXd target_signature(const Signatures& sig, const ScenarioParams& p, int t) {
  const double theta = std::min(p.drift_rate * t, std::numbers::pi / 2.0);
  return std::cos(theta) * sig.query + std::sin(theta) * sig.drift;
}

Scenario gen_scenario(std::uint64_t seed, const ScenarioParams& p, const std::string& preset_label) {
  p.validate();
  Scenario s;
  s.seed = seed;
  s.preset = preset_label;
  s.height = p.height;
  s.width = p.width;
  s.channels = p.channels;

  const Signatures sig = make_signatures(seed, p.channels);
  const Square center = centered_square(p);
  auto noise = stream(seed, 2);

  s.query.feature = noise_map(noise, p.height, p.width, p.channels, p.noise);
  paint(s.query.feature, center, sig.query, p.amplitude);
  quantize_all(s.query.feature);
  s.query.mask = square_mask(p.height, p.width, center);
  s.query.frame_index = 0;

  const double ds = p.distractor_similarity;
  const Eigen::VectorXd distractor_sig = ds * sig.query + std::sqrt(std::max(0.0, 1.0 - ds * ds)) * sig.other;
  const std::array<Square, 2> distractor_at = {
      Square{1, 1, p.distractor_size},
      Square{p.height - 1 - p.distractor_size, p.width - 1 - p.distractor_size, p.distractor_size}};

  for (int t = 0; t < p.frames; ++t) {
    const bool vis = present(p, t);
    Square sq = center;
    if (p.motion_amplitude > 0.0) {
      sq.col += static_cast<int>(std::lround(p.motion_amplitude * std::sin(2.0 * std::numbers::pi * t / p.motion_period)));
    }
    FeatureMap f;
    if (p.identical_frames && vis) {
      f = s.query.feature;
    } else {
      f = noise_map(noise, p.height, p.width, p.channels, p.noise);
      if (vis) paint(f, sq, target_signature(sig, p, t), p.amplitude);
      for (int d = 0; d < p.distractors; ++d) paint(f, distractor_at[static_cast<std::size_t>(d)], distractor_sig, p.amplitude);
      quantize_all(f);
    }
    s.frames.push_back(std::move(f));
    if (vis) {
      s.gt_masks.push_back(square_mask(p.height, p.width, sq));
      const int x0 = std::max(0, sq.col), y0 = std::max(0, sq.row);
      s.gt_boxes.push_back(BBox{x0, y0, std::min(p.width, sq.col + sq.size) - 1, std::min(p.height, sq.row + sq.size) - 1});
    } else {
      s.gt_masks.emplace_back(p.height, p.width);
      s.gt_boxes.push_back(std::nullopt);
    }
  }

  // The answer is the last run of visible frames.
  for (int t = p.frames - 1; t >= 0; --t) {
    if (!present(p, t)) continue;
    int start = t;
    while (start > 0 && present(p, start - 1)) --start;
    s.gt_interval = TemporalInterval{start, t};
    break;
  }

  if (p.geometry) add_geometry(s, p, seed);
  s.validate();
  return s;
}

Scenario gen_scenario(std::uint64_t seed, Preset preset) {
  return gen_scenario(seed, preset_params(preset), preset_name(preset));
}

Eigen::Vector3d gt_displacement(const Scenario& s, std::size_t frame) {
  if (!s.gt_point || !s.gt_alignment || frame >= s.cameras.size()) {
    throw ParameterError("gt_displacement: scenario has no geometry for this frame");
  }
  return relative_displacement(s.cameras[frame], *s.gt_point, *s.gt_alignment);
}

}  // namespace eagle::harness
