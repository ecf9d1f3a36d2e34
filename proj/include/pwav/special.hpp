#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include <boost/math/special_functions/erf.hpp>

namespace pwav::special {

/// Error function of a complex argument.
///
/// Series of Abramowitz & Stegun 7.1.29; relative error about 1e-16 of
/// |erf(z)|. Only needed here for moderate imaginary parts (|Im z| < 10).
inline std::complex<double> erf(std::complex<double> z) {
  using std::numbers::pi;
  const double x = z.real();
  const double y = z.imag();
  if (y == 0.0) return {std::erf(x), 0.0};
  if (x < 0.0) return -erf(-z);

  const int terms = static_cast<int>(2.0 * std::abs(y) + 16.0);
  if (x == 0.0) {
    // limit x -> 0 of the general series: erf(iy) = i erfi(y)
    double im = y / pi;
    for (int n = 1; n <= terms; ++n) {
      const double nd = n;
      im += (2.0 / pi) * std::exp(-nd * nd / 4.0) * std::sinh(nd * y) / nd;
    }
    return {0.0, im};
  }

  const double e = std::exp(-x * x);
  const double c = std::cos(2.0 * x * y);
  const double s = std::sin(2.0 * x * y);
  double re = std::erf(x) + e * (1.0 - c) / (2.0 * pi * x);
  double im = e * s / (2.0 * pi * x);
  for (int n = 1; n <= terms; ++n) {
    const double nd = n;
    // e^{-n^2/4} cosh(ny) and e^{-n^2/4} sinh(ny) folded to avoid overflow
    const double ep = std::exp(nd * y - nd * nd / 4.0);
    const double em = std::exp(-nd * y - nd * nd / 4.0);
    const double ch = 0.5 * (ep + em);
    const double sh = 0.5 * (ep - em);
    const double g0 = std::exp(-nd * nd / 4.0);
    const double denom = nd * nd + 4.0 * x * x;
    const double f = 2.0 * x * g0 - 2.0 * x * ch * c + nd * sh * s;
    const double g = 2.0 * x * ch * s + nd * sh * c;
    re += (2.0 / pi) * e * f / denom;
    im += (2.0 / pi) * e * g / denom;
  }
  return {re, im};
}

/// ∫_lo^hi exp(-v²/2 + i ω v) dv in closed form.
inline std::complex<double> gauss_chirp_integral(double lo, double hi,
                                                 double omega) {
  using std::numbers::pi;
  if (hi <= lo) return {0.0, 0.0};
  const double r2 = std::numbers::sqrt2;
  const std::complex<double> shift{0.0, omega};
  const auto d = erf((hi - shift) / r2) - erf((lo - shift) / r2);
  return std::exp(-omega * omega / 2.0) * std::sqrt(pi / 2.0) * d;
}

inline double normal_cdf(double x) {
  return 0.5 * std::erfc(-x / std::numbers::sqrt2);
}

inline double normal_quantile(double q) {
  return -std::numbers::sqrt2 * boost::math::erfc_inv(2.0 * q);
}

/// Asymptotic Kolmogorov survival function P(sqrt(m) D > x) with the
/// Stephens small-sample correction applied by the caller.
inline double kolmogorov_sf(double x) {
  if (x <= 0.0) return 1.0;
  if (x < 0.2) return 1.0;
  double sum = 0.0;
  for (int k = 1; k <= 100; ++k) {
    const double term = std::exp(-2.0 * k * k * x * x);
    sum += (k % 2 ? 1.0 : -1.0) * term;
    if (term < 1e-17) break;
  }
  return std::clamp(2.0 * sum, 0.0, 1.0);
}

}  // namespace pwav::special
