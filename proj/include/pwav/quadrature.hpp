#pragma once

#include <cstddef>
#include <stdexcept>

namespace pwav {

/// Composite Simpson rule on [lo, hi] with `intervals` subintervals (rounded
/// up to an even count). Works for any return type closed under + and scalar *.
template <typename F>
auto simpson(F&& f, double lo, double hi, std::size_t intervals) {
  using R = decltype(f(lo));
  if (intervals < 2) intervals = 2;
  if (intervals % 2) ++intervals;
  const double h = (hi - lo) / static_cast<double>(intervals);
  R odd{}, even{};
  for (std::size_t k = 1; k < intervals; ++k) {
    const R v = f(lo + h * static_cast<double>(k));
    if (k % 2) {
      odd += v;
    } else {
      even += v;
    }
  }
  return (f(lo) + f(hi) + 4.0 * odd + 2.0 * even) * (h / 3.0);
}

/// Simpson weights for `intervals` (even) subintervals of width h.
inline double simpson_weight(std::size_t k, std::size_t intervals, double h) {
  if (k == 0 || k == intervals) return h / 3.0;
  return (k % 2 ? 4.0 : 2.0) * h / 3.0;
}

}  // namespace pwav
