#pragma once

#include <filesystem>
#include <string>
#include <string_view>

#include "eagle/harness/metrics.hpp"
#include "eagle/harness/scenario.hpp"
#include "eagle/pipeline.hpp"

namespace eagle::harness {

// All files are UTF-8 JSON objects carrying "format" and "version" keys; see
// docs/file-formats.md. Parse failures raise SchemaError with the line and
// column, field failures with the JSON pointer of the offending value.

inline constexpr int kFormatVersion = 1;

std::string scenario_to_json(const Scenario& s);
Scenario scenario_from_json(std::string_view text);

std::string config_to_json(const PipelineConfig& cfg);
/// Missing keys keep their defaults; unknown keys are rejected.
PipelineConfig config_from_json(std::string_view text);

/// A track together with the options used to lift it to 3D.
struct TrackFile {
  int height = 0;
  int width = 0;
  TrackOutput track;
  Geo3dOptions geo;
};

std::string track_to_json(const TrackFile& t);
TrackFile track_from_json(std::string_view text);

std::string report_to_json(const MetricsReport2D& r);
std::string report_to_json(const MetricsReport3D& r);
std::string report_to_text(const MetricsReport2D& r);
std::string report_to_text(const MetricsReport3D& r);

/// Reads a whole file; IoError if it cannot be opened.
std::string read_file(const std::filesystem::path& path);

/// Writes to a sibling temporary file and renames it over the target.
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

}  // namespace eagle::harness
