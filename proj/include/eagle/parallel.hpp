#pragma once

#include <cstddef>

#include <tbb/parallel_for.h>

namespace eagle {

/// Runs fn(i) for i in [0, n). Callers write into per-index slots and reduce
/// serially afterwards, so results do not depend on the thread count.
template <class Fn>
void parallel_for_index(std::size_t n, Fn&& fn) {
  if (n <= 1) {
    for (std::size_t i = 0; i < n; ++i) fn(i);
    return;
  }
  tbb::parallel_for(std::size_t{0}, n, [&](std::size_t i) { fn(i); });
}

}  // namespace eagle
