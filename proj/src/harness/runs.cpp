#include "eagle/harness/runs.hpp"

#include "eagle/errors.hpp"

namespace eagle::harness {

std::string run2d(const Scenario& s, const PipelineConfig& cfg) {
  TrackFile out;
  out.height = s.height;
  out.width = s.width;
  out.track = track_video(s.query, s.frames, cfg);
  out.geo.zeta = cfg.zeta;
  out.geo.lambda_thr = cfg.lambda_thr;
  return track_to_json(out);
}

std::string run3d(const Scenario& s, const TrackFile& track) {
  if (!s.has_geometry()) throw ParameterError("scenario has no camera geometry");
  if (track.height != s.height || track.width != s.width) {
    throw DimensionError("track frame size does not match the scenario");
  }
  TrackFile out = track;
  try {
    out.track = finalize_3d(track.track, s.cameras, s.alignment_pairs, track.geo);
  } catch (const NoDetectionError&) {
    out.track.world_point.reset();
    out.track.displacements.clear();
  }
  return track_to_json(out);
}

}  // namespace eagle::harness
