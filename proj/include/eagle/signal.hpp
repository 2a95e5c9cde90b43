#pragma once

#include <span>
#include <vector>

namespace eagle {

/// Running median with an odd window. Near the ends the window shrinks
/// symmetrically to the largest odd neighborhood that fits, so every output
/// is an actual sample value. Throws ParameterError on an even/non-positive
/// window and EmptyInputError on an empty sequence.
std::vector<double> median_filter_1d(std::span<const double> seq, int window);

}  // namespace eagle
