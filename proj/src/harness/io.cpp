#include "eagle/harness/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <sstream>

#include <json.hpp>

#include "eagle/errors.hpp"

namespace eagle::harness {

using ojson = nlohmann::ordered_json;

namespace {

// ---- reading -------------------------------------------------------------

[[noreturn]] void fail(const std::string& path, const std::string& what) {
  throw SchemaError((path.empty() ? std::string("/") : path) + ": " + what);
}

class Node {
 public:
  Node(const ojson& j, std::string path) : j_(j), path_(std::move(path)) {}

  const std::string& path() const { return path_; }
  const ojson& raw() const { return j_; }
  bool is_null() const { return j_.is_null(); }

  Node operator[](const std::string& key) const {
    require_object();
    auto it = j_.find(key);
    if (it == j_.end()) fail(path_ + "/" + key, "missing field");
    return Node(*it, path_ + "/" + key);
  }

  std::optional<Node> find(const std::string& key) const {
    require_object();
    auto it = j_.find(key);
    if (it == j_.end()) return std::nullopt;
    return Node(*it, path_ + "/" + key);
  }

  Node at(std::size_t i) const { return Node(j_.at(i), path_ + "/" + std::to_string(i)); }

  std::size_t size() const {
    require_array();
    return j_.size();
  }

  void only_keys(std::initializer_list<const char*> keys) const {
    require_object();
    std::set<std::string> allowed(keys.begin(), keys.end());
    for (auto it = j_.begin(); it != j_.end(); ++it) {
      if (!allowed.count(it.key())) fail(path_ + "/" + it.key(), "unknown field");
    }
  }

  double number() const {
    if (!j_.is_number()) fail(path_, "expected a number");
    const double v = j_.get<double>();
    if (!std::isfinite(v)) fail(path_, "expected a finite number");
    return v;
  }

  long long integer() const {
    if (!j_.is_number_integer()) fail(path_, "expected an integer");
    return j_.get<long long>();
  }

  int int32() const {
    const long long v = integer();
    if (v < -2147483647LL || v > 2147483647LL) fail(path_, "integer out of range");
    return static_cast<int>(v);
  }

  std::uint64_t uint64() const {
    if (!j_.is_number_unsigned() && !(j_.is_number_integer() && j_.get<long long>() >= 0)) {
      fail(path_, "expected a non-negative integer");
    }
    return j_.get<std::uint64_t>();
  }

  bool boolean() const {
    if (!j_.is_boolean()) fail(path_, "expected true or false");
    return j_.get<bool>();
  }

  std::string string() const {
    if (!j_.is_string()) fail(path_, "expected a string");
    return j_.get<std::string>();
  }

  std::vector<double> numbers(std::optional<std::size_t> expected = std::nullopt) const {
    require_array();
    if (expected && j_.size() != *expected) {
      fail(path_, "expected " + std::to_string(*expected) + " values, found " + std::to_string(j_.size()));
    }
    std::vector<double> out;
    out.reserve(j_.size());
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(at(i).number());
    return out;
  }

  std::vector<long long> integers(std::optional<std::size_t> expected = std::nullopt) const {
    require_array();
    if (expected && j_.size() != *expected) {
      fail(path_, "expected " + std::to_string(*expected) + " values, found " + std::to_string(j_.size()));
    }
    std::vector<long long> out;
    out.reserve(j_.size());
    for (std::size_t i = 0; i < j_.size(); ++i) out.push_back(at(i).integer());
    return out;
  }

  void require_object() const {
    if (!j_.is_object()) fail(path_, "expected an object");
  }
  void require_array() const {
    if (!j_.is_array()) fail(path_, "expected an array");
  }

 private:
  const ojson& j_;
  std::string path_;
};

ojson parse(std::string_view text) {
  try {
    return ojson::parse(text.begin(), text.end());
  } catch (const nlohmann::json::parse_error& e) {
    std::size_t line = 1, col = 1;
    const std::size_t end = std::min<std::size_t>(e.byte > 0 ? e.byte - 1 : 0, text.size());
    for (std::size_t i = 0; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw SchemaError("line " + std::to_string(line) + ", column " + std::to_string(col) + ": malformed JSON");
  }
}

void check_header(const Node& root, const std::string& format) {
  root.require_object();
  if (root["format"].string() != format) fail("/format", "expected \"" + format + "\"");
  if (root["version"].integer() != kFormatVersion) {
    fail("/version", "unsupported version (expected " + std::to_string(kFormatVersion) + ")");
  }
}

// Wraps library validation failures so the message points at the field.
template <class Fn>
auto checked(const std::string& path, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const SchemaError&) {
    throw;
  } catch (const Error& e) {
    fail(path, e.what());
  }
}

FeatureMap read_feature(const Node& n, int h, int w, int c) {
  std::vector<double> v = n.numbers(static_cast<std::size_t>(h) * w * c);
  return checked(n.path(), [&] { return FeatureMap(h, w, c, std::move(v)); });
}

ScoreMap read_score(const Node& n, int h, int w) {
  ScoreMap s(h, w);
  s.data = n.numbers(static_cast<std::size_t>(h) * w);
  return s;
}

// Run lengths alternate background / foreground, starting with background.
ojson mask_rle(const BinaryMask& m) {
  ojson runs = ojson::array();
  std::uint8_t cur = 0;
  long long len = 0;
  for (std::uint8_t v : m.data) {
    if (v == cur) {
      ++len;
    } else {
      runs.push_back(len);
      cur = v;
      len = 1;
    }
  }
  runs.push_back(len);
  return runs;
}

BinaryMask read_mask(const Node& n, int h, int w) {
  const std::vector<long long> runs = n.integers();
  BinaryMask m(h, w);
  std::size_t pos = 0;
  std::uint8_t cur = 0;
  for (std::size_t i = 0; i < runs.size(); ++i) {
    if (runs[i] < 0) fail(n.path() + "/" + std::to_string(i), "run length must be non-negative");
    if (pos + static_cast<std::size_t>(runs[i]) > m.data.size()) fail(n.path(), "runs exceed the map size");
    for (long long k = 0; k < runs[i]; ++k) m.data[pos++] = cur;
    cur ^= 1;
  }
  if (pos != m.data.size()) fail(n.path(), "runs do not cover the map");
  return m;
}

ojson bbox_json(const std::optional<BBox>& b) {
  if (!b) return nullptr;
  return ojson::array({b->x_min, b->y_min, b->x_max, b->y_max});
}

std::optional<BBox> read_bbox(const Node& n) {
  if (n.is_null()) return std::nullopt;
  const auto v = n.integers(4);
  BBox b{static_cast<int>(v[0]), static_cast<int>(v[1]), static_cast<int>(v[2]), static_cast<int>(v[3])};
  if (b.x_max < b.x_min || b.y_max < b.y_min) fail(n.path(), "box corners out of order");
  return b;
}

ojson interval_json(const std::optional<TemporalInterval>& iv) {
  if (!iv) return nullptr;
  return ojson::array({iv->start_frame, iv->end_frame});
}

std::optional<TemporalInterval> read_interval(const Node& n) {
  if (n.is_null()) return std::nullopt;
  const auto v = n.integers(2);
  if (v[0] < 0 || v[1] < v[0]) fail(n.path(), "interval must satisfy 0 <= start <= end");
  return TemporalInterval{static_cast<int>(v[0]), static_cast<int>(v[1])};
}

ojson vec3_json(const Eigen::Vector3d& v) { return ojson::array({v.x(), v.y(), v.z()}); }

Eigen::Vector3d read_vec3(const Node& n) {
  const auto v = n.numbers(3);
  return {v[0], v[1], v[2]};
}

template <int R, int C>
ojson matrix_json(const Eigen::Matrix<double, R, C>& m) {
  ojson a = ojson::array();
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) a.push_back(m(r, c));
  }
  return a;
}

template <int R, int C>
Eigen::Matrix<double, R, C> read_matrix(const Node& n) {
  const auto v = n.numbers(R * C);
  Eigen::Matrix<double, R, C> m;
  for (int r = 0; r < R; ++r) {
    for (int c = 0; c < C; ++c) m(r, c) = v[static_cast<std::size_t>(r * C + c)];
  }
  return m;
}

ojson sim3_json(const Sim3Transform& t) {
  ojson j;
  j["scale"] = t.scale;
  j["rotation"] = matrix_json<3, 3>(t.rotation);
  j["translation"] = vec3_json(t.translation);
  return j;
}

Sim3Transform read_sim3(const Node& n) {
  n.only_keys({"scale", "rotation", "translation"});
  Sim3Transform t;
  t.scale = n["scale"].number();
  t.rotation = read_matrix<3, 3>(n["rotation"]);
  t.translation = read_vec3(n["translation"]);
  checked(n.path(), [&] { t.validate(); });
  return t;
}

}  // namespace

// ---- scenario ------------------------------------------------------------

std::string scenario_to_json(const Scenario& s) {
  ojson j;
  j["format"] = "eagle-scenario";
  j["version"] = kFormatVersion;
  j["seed"] = s.seed;
  j["preset"] = s.preset;
  j["height"] = s.height;
  j["width"] = s.width;
  j["channels"] = s.channels;
  j["frame_count"] = s.frames.size();
  j["query"] = {{"frame_index", s.query.frame_index},
                {"feature", s.query.feature.data},
                {"mask", mask_rle(s.query.mask)}};
  ojson frames = ojson::array();
  for (std::size_t i = 0; i < s.frames.size(); ++i) {
    frames.push_back({{"feature", s.frames[i].data}, {"gt_mask", mask_rle(s.gt_masks[i])}, {"gt_bbox", bbox_json(s.gt_boxes[i])}});
  }
  j["frames"] = std::move(frames);
  j["gt_interval"] = interval_json(s.gt_interval);

  ojson cams = ojson::array();
  for (const auto& c : s.cameras) {
    cams.push_back({{"pose", matrix_json<4, 4>(c.pose)},
                    {"intrinsics", matrix_json<3, 3>(c.intrinsics)},
                    {"depth", c.depth.data},
                    {"depth_uncertainty", c.depth_uncertainty.data},
                    {"pose_valid", c.pose_valid}});
  }
  j["cameras"] = std::move(cams);
  j["gt_point"] = s.gt_point ? vec3_json(*s.gt_point) : ojson(nullptr);
  j["gt_alignment"] = s.gt_alignment ? sim3_json(*s.gt_alignment) : ojson(nullptr);
  ojson pairs = ojson::array();
  for (const auto& p : s.alignment_pairs) pairs.push_back({{"src", vec3_json(p.src)}, {"dst", vec3_json(p.dst)}});
  j["alignment_pairs"] = std::move(pairs);
  return j.dump() + "\n";
}

Scenario scenario_from_json(std::string_view text) {
  const ojson doc = parse(text);
  const Node root(doc, "");
  check_header(root, "eagle-scenario");
  root.only_keys({"format", "version", "seed", "preset", "height", "width", "channels", "frame_count", "query", "frames",
                  "gt_interval", "cameras", "gt_point", "gt_alignment", "alignment_pairs"});
  Scenario s;
  s.seed = root["seed"].uint64();
  s.preset = root["preset"].string();
  s.height = root["height"].int32();
  s.width = root["width"].int32();
  s.channels = root["channels"].int32();
  if (s.height < 1 || s.width < 1 || s.channels < 1) fail("/height", "canvas dimensions must be positive");
  const int h = s.height, w = s.width, c = s.channels;

  const Node q = root["query"];
  q.only_keys({"frame_index", "feature", "mask"});
  s.query.frame_index = q["frame_index"].int32();
  s.query.feature = read_feature(q["feature"], h, w, c);
  s.query.mask = read_mask(q["mask"], h, w);
  if (s.query.mask.empty()) fail("/query/mask", "query mask is empty");

  const Node frames = root["frames"];
  const long long declared = root["frame_count"].integer();
  if (declared != static_cast<long long>(frames.size())) fail("/frame_count", "does not match the number of frames");
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Node f = frames.at(i);
    f.only_keys({"feature", "gt_mask", "gt_bbox"});
    s.frames.push_back(read_feature(f["feature"], h, w, c));
    s.gt_masks.push_back(read_mask(f["gt_mask"], h, w));
    s.gt_boxes.push_back(read_bbox(f["gt_bbox"]));
  }
  s.gt_interval = read_interval(root["gt_interval"]);

  const Node cams = root["cameras"];
  for (std::size_t i = 0; i < cams.size(); ++i) {
    const Node n = cams.at(i);
    n.only_keys({"pose", "intrinsics", "depth", "depth_uncertainty", "pose_valid"});
    CameraFrame cam;
    cam.pose = read_matrix<4, 4>(n["pose"]);
    cam.intrinsics = read_matrix<3, 3>(n["intrinsics"]);
    cam.depth = read_score(n["depth"], h, w);
    cam.depth_uncertainty = read_score(n["depth_uncertainty"], h, w);
    cam.pose_valid = n["pose_valid"].boolean();
    checked(n.path(), [&] { cam.validate(); });
    s.cameras.push_back(std::move(cam));
  }
  const Node gp = root["gt_point"];
  if (!gp.is_null()) s.gt_point = read_vec3(gp);
  const Node ga = root["gt_alignment"];
  if (!ga.is_null()) s.gt_alignment = read_sim3(ga);
  const Node pairs = root["alignment_pairs"];
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    const Node p = pairs.at(i);
    p.only_keys({"src", "dst"});
    s.alignment_pairs.push_back({read_vec3(p["src"]), read_vec3(p["dst"])});
  }
  checked("", [&] { s.validate(); });
  return s;
}

// ---- config --------------------------------------------------------------

std::string config_to_json(const PipelineConfig& c) {
  ojson j;
  j["format"] = "eagle-config";
  j["version"] = kFormatVersion;
  j["clip_length"] = c.clip_length;
  j["dense_update_horizon"] = c.dense_update_horizon;
  j["update_stride"] = c.update_stride;
  j["amm_iters_init"] = c.amm_iters_init;
  j["amm_iters_update"] = c.amm_iters_update;
  j["glm_iters_init"] = c.glm_iters_init;
  j["glm_iters_update"] = c.glm_iters_update;
  j["admit_threshold"] = c.admit_threshold;
  j["halt_threshold"] = c.halt_threshold;
  j["halt_window"] = c.halt_window;
  j["temporal_ratio"] = c.temporal_ratio;
  j["median_window"] = c.median_window;
  j["capacity"] = c.capacity;
  j["zeta"] = c.zeta;
  j["lambda_thr"] = c.lambda_thr;
  j["sample_resolution"] = c.sample_resolution;
  j["seg_kernel"] = c.seg_kernel;
  j["track_kernel"] = c.track_kernel;
  j["label_channels"] = c.label_channels;
  j["seg_regularizer"] = c.seg_regularizer;
  j["track_regularizer"] = c.track_regularizer;
  j["mask_threshold"] = c.mask_threshold;
  j["source_window"] = c.source_window;
  j["source_high_ratio"] = c.source_high_ratio;
  j["source_min_fraction"] = c.source_min_fraction;
  j["reweighter"] = {{"foreground_weight", c.reweighter.foreground_weight},
                     {"background_weight", c.reweighter.background_weight},
                     {"blur_sigma", c.reweighter.blur_sigma}};
  j["spatial_weight"] = {{"w_fg", c.spatial_weight.w_fg}, {"w_bg", c.spatial_weight.w_bg}};
  j["score_encoder"] = {{"out_channels", c.score_encoder.out_channels},
                        {"gain", c.score_encoder.gain},
                        {"bias", c.score_encoder.bias}};
  j["decoder"] = {{"gain", c.decoder.gain}, {"bias", c.decoder.bias}};
  j["updates_enabled"] = c.updates_enabled;
  return j.dump(2) + "\n";
}

PipelineConfig config_from_json(std::string_view text) {
  const ojson doc = parse(text);
  const Node root(doc, "");
  check_header(root, "eagle-config");
  root.only_keys({"format", "version", "clip_length", "dense_update_horizon", "update_stride", "amm_iters_init",
                  "amm_iters_update", "glm_iters_init", "glm_iters_update", "admit_threshold", "halt_threshold",
                  "halt_window", "temporal_ratio", "median_window", "capacity", "zeta", "lambda_thr",
                  "sample_resolution", "seg_kernel", "track_kernel", "label_channels", "seg_regularizer",
                  "track_regularizer", "mask_threshold", "source_window", "source_high_ratio", "source_min_fraction",
                  "reweighter", "spatial_weight", "score_encoder", "decoder", "updates_enabled"});
  PipelineConfig c;
  auto get_int = [&](const Node& n, const char* key, int& dst) {
    if (auto v = n.find(key)) dst = v->int32();
  };
  auto get_num = [&](const Node& n, const char* key, double& dst) {
    if (auto v = n.find(key)) dst = v->number();
  };
  get_int(root, "clip_length", c.clip_length);
  get_int(root, "dense_update_horizon", c.dense_update_horizon);
  get_int(root, "update_stride", c.update_stride);
  get_int(root, "amm_iters_init", c.amm_iters_init);
  get_int(root, "amm_iters_update", c.amm_iters_update);
  get_int(root, "glm_iters_init", c.glm_iters_init);
  get_int(root, "glm_iters_update", c.glm_iters_update);
  get_num(root, "admit_threshold", c.admit_threshold);
  get_num(root, "halt_threshold", c.halt_threshold);
  get_int(root, "halt_window", c.halt_window);
  get_num(root, "temporal_ratio", c.temporal_ratio);
  get_int(root, "median_window", c.median_window);
  get_int(root, "capacity", c.capacity);
  get_num(root, "zeta", c.zeta);
  get_num(root, "lambda_thr", c.lambda_thr);
  get_int(root, "sample_resolution", c.sample_resolution);
  get_int(root, "seg_kernel", c.seg_kernel);
  get_int(root, "track_kernel", c.track_kernel);
  get_int(root, "label_channels", c.label_channels);
  get_num(root, "seg_regularizer", c.seg_regularizer);
  get_num(root, "track_regularizer", c.track_regularizer);
  get_num(root, "mask_threshold", c.mask_threshold);
  get_int(root, "source_window", c.source_window);
  get_num(root, "source_high_ratio", c.source_high_ratio);
  get_num(root, "source_min_fraction", c.source_min_fraction);
  if (auto n = root.find("reweighter")) {
    n->only_keys({"foreground_weight", "background_weight", "blur_sigma"});
    get_num(*n, "foreground_weight", c.reweighter.foreground_weight);
    get_num(*n, "background_weight", c.reweighter.background_weight);
    get_num(*n, "blur_sigma", c.reweighter.blur_sigma);
  }
  if (auto n = root.find("spatial_weight")) {
    n->only_keys({"w_fg", "w_bg"});
    get_num(*n, "w_fg", c.spatial_weight.w_fg);
    get_num(*n, "w_bg", c.spatial_weight.w_bg);
  }
  if (auto n = root.find("score_encoder")) {
    n->only_keys({"out_channels", "gain", "bias"});
    get_int(*n, "out_channels", c.score_encoder.out_channels);
    get_num(*n, "gain", c.score_encoder.gain);
    get_num(*n, "bias", c.score_encoder.bias);
  }
  if (auto n = root.find("decoder")) {
    n->only_keys({"gain", "bias"});
    get_num(*n, "gain", c.decoder.gain);
    get_num(*n, "bias", c.decoder.bias);
  }
  if (auto n = root.find("updates_enabled")) c.updates_enabled = n->boolean();
  checked("", [&] { c.validate(); });
  return c;
}

// ---- track ---------------------------------------------------------------

std::string track_to_json(const TrackFile& t) {
  ojson j;
  j["format"] = "eagle-track";
  j["version"] = kFormatVersion;
  j["height"] = t.height;
  j["width"] = t.width;
  j["geo"] = {{"zeta", t.geo.zeta},
              {"lambda_thr", t.geo.lambda_thr},
              {"weights", {t.geo.weights.phi, t.geo.weights.psi, t.geo.weights.mu}}};
  j["interval"] = interval_json(t.track.interval);
  ojson frames = ojson::array();
  for (std::size_t i = 0; i < t.track.results.size(); ++i) {
    const SegmentationResult& r = t.track.results[i];
    ojson probs = ojson::array();
    for (std::size_t k = 0; k < r.mask.data.size(); ++k) {
      if (r.mask.data[k]) probs.push_back(r.prob.data[k]);
    }
    frames.push_back({{"frame_index", r.frame_index},
                      {"s_conf", r.s_conf},
                      {"peak", i < t.track.peaks.size() ? t.track.peaks[i] : 0.0},
                      {"bbox", bbox_json(r.bbox)},
                      {"mask", mask_rle(r.mask)},
                      {"mask_prob", std::move(probs)}});
  }
  j["frames"] = std::move(frames);
  j["world_point"] = t.track.world_point ? vec3_json(*t.track.world_point) : ojson(nullptr);
  ojson disp = ojson::array();
  for (const auto& d : t.track.displacements) disp.push_back({{"frame_index", d.frame_index}, {"delta", vec3_json(d.delta)}});
  j["displacements"] = std::move(disp);
  return j.dump() + "\n";
}

TrackFile track_from_json(std::string_view text) {
  const ojson doc = parse(text);
  const Node root(doc, "");
  check_header(root, "eagle-track");
  root.only_keys({"format", "version", "height", "width", "geo", "interval", "frames", "world_point", "displacements"});
  TrackFile t;
  t.height = root["height"].int32();
  t.width = root["width"].int32();
  if (t.height < 1 || t.width < 1) fail("/height", "map dimensions must be positive");
  const Node geo = root["geo"];
  geo.only_keys({"zeta", "lambda_thr", "weights"});
  t.geo.zeta = geo["zeta"].number();
  t.geo.lambda_thr = geo["lambda_thr"].number();
  const auto wts = geo["weights"].numbers(3);
  t.geo.weights = {wts[0], wts[1], wts[2]};
  t.track.interval = read_interval(root["interval"]);

  const Node frames = root["frames"];
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const Node f = frames.at(i);
    f.only_keys({"frame_index", "s_conf", "peak", "bbox", "mask", "mask_prob"});
    SegmentationResult r;
    r.frame_index = f["frame_index"].int32();
    if (r.frame_index != static_cast<int>(i)) fail(f.path() + "/frame_index", "frames must be numbered 0, 1, 2, ...");
    r.s_conf = f["s_conf"].number();
    r.bbox = read_bbox(f["bbox"]);
    r.mask = read_mask(f["mask"], t.height, t.width);
    r.prob = ScoreMap(t.height, t.width);
    const auto probs = f["mask_prob"].numbers(r.mask.count());
    std::size_t next = 0;
    for (std::size_t k = 0; k < r.mask.data.size(); ++k) {
      if (r.mask.data[k]) r.prob.data[k] = probs[next++];
    }
    t.track.peaks.push_back(f["peak"].number());
    t.track.results.push_back(std::move(r));
  }
  if (t.track.interval && t.track.interval->end_frame >= static_cast<int>(t.track.results.size())) {
    fail("/interval", "interval extends past the last frame");
  }
  const Node wp = root["world_point"];
  if (!wp.is_null()) t.track.world_point = read_vec3(wp);
  const Node disp = root["displacements"];
  for (std::size_t i = 0; i < disp.size(); ++i) {
    const Node d = disp.at(i);
    d.only_keys({"frame_index", "delta"});
    t.track.displacements.push_back({d["frame_index"].int32(), read_vec3(d["delta"])});
  }
  return t;
}

// ---- reports -------------------------------------------------------------

std::string report_to_json(const MetricsReport2D& r) {
  ojson j;
  j["tAP25"] = r.tAP25;
  j["stAP25"] = r.stAP25;
  j["recovery_pct"] = r.recovery_pct;
  j["success_pct"] = r.success_pct;
  j["temporal_iou"] = r.temporal_iou;
  j["spatiotemporal_iou"] = r.spatiotemporal_iou;
  return j.dump() + "\n";
}

std::string report_to_json(const MetricsReport3D& r) {
  ojson j;
  j["success_pct"] = r.success_pct;
  j["success_star_pct"] = r.success_star_pct;
  j["l2"] = r.l2 ? ojson(*r.l2) : ojson(nullptr);
  j["angle"] = r.angle ? ojson(*r.angle) : ojson(nullptr);
  j["qwp_pct"] = r.qwp_pct;
  return j.dump() + "\n";
}

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

}  // namespace

std::string report_to_text(const MetricsReport2D& r) {
  std::ostringstream os;
  os << "tAP25        " << fmt(r.tAP25) << "\n"
     << "stAP25       " << fmt(r.stAP25) << "\n"
     << "recovery %   " << fmt(r.recovery_pct) << "\n"
     << "success %    " << fmt(r.success_pct) << "\n"
     << "temporal IoU " << fmt(r.temporal_iou) << "\n"
     << "tube IoU     " << fmt(r.spatiotemporal_iou) << "\n";
  return os.str();
}

std::string report_to_text(const MetricsReport3D& r) {
  std::ostringstream os;
  os << "success %    " << fmt(r.success_pct) << "\n"
     << "success* %   " << fmt(r.success_star_pct) << "\n"
     << "L2 (m)       " << (r.l2 ? fmt(*r.l2) : "n/a") << "\n"
     << "angle (rad)  " << (r.angle ? fmt(*r.angle) : "n/a") << "\n"
     << "QwP %        " << fmt(r.qwp_pct) << "\n";
  return os.str();
}

// ---- files ---------------------------------------------------------------

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file_atomic(const std::filesystem::path& path, std::string_view content) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    out.flush();
    if (!out) throw IoError("write failed for " + tmp.string());
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp, ec);
    throw IoError("cannot rename into " + path.string());
  }
}

}  // namespace eagle::harness
