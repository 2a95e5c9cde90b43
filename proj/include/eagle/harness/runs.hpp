#pragma once

#include <string>

#include "eagle/harness/io.hpp"

namespace eagle::harness {

/// Tracks the scenario's frames and returns the serialized track file.
std::string run2d(const Scenario& s, const PipelineConfig& cfg);

/// Lifts a 2D track to 3D using the scenario's cameras and alignment pairs.
/// A track with no temporal detection is returned without 3D fields.
std::string run3d(const Scenario& s, const TrackFile& track);

}  // namespace eagle::harness
