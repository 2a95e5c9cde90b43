#include "eagle/signal.hpp"

#include <algorithm>

#include "eagle/errors.hpp"

namespace eagle {

std::vector<double> median_filter_1d(std::span<const double> seq, int window) {
  if (window <= 0 || window % 2 == 0) throw ParameterError("median_filter_1d: window must be odd and positive");
  if (seq.empty()) throw EmptyInputError("median_filter_1d: empty sequence");
  const int n = static_cast<int>(seq.size());
  const int half = window / 2;
  std::vector<double> out(seq.size());
  std::vector<double> buf;
  buf.reserve(static_cast<std::size_t>(window));
  for (int i = 0; i < n; ++i) {
    const int h = std::min({half, i, n - 1 - i});
    buf.assign(seq.begin() + (i - h), seq.begin() + (i + h + 1));
    auto mid = buf.begin() + h;
    std::nth_element(buf.begin(), mid, buf.end());
    out[static_cast<std::size_t>(i)] = *mid;
  }
  return out;
}

}  // namespace eagle
