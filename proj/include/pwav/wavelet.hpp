#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <filesystem>
#include <fstream>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <vector>

#include "pwav/error.hpp"
#include "pwav/quadrature.hpp"

namespace pwav {

using cplx = std::complex<double>;

enum class WaveletKind { Morlet, MexicanHat, Tabulated };

namespace detail {

struct WaveletData {
  WaveletKind kind = WaveletKind::Morlet;
  double alpha = 8.0;
  bool is_complex = true;
  std::vector<cplx> samples;  // Tabulated only, uniform on [-alpha/2, alpha/2]
  double scale = 1.0;         // unit-norm factor applied after truncation
  cplx offset{0.0, 0.0};      // mean removed before scaling
};

// Cubic Lagrange interpolation of uniformly spaced samples on [lo, hi].
inline cplx interpolate_uniform(const std::vector<cplx>& y, double lo,
                                double hi, double t) {
  const std::size_t n = y.size();
  const double h = (hi - lo) / static_cast<double>(n - 1);
  const double pos = (t - lo) / h;
  auto i0 = static_cast<long>(std::floor(pos)) - 1;
  i0 = std::clamp(i0, 0L, static_cast<long>(n) - 4);
  cplx out{0.0, 0.0};
  for (long j = 0; j < 4; ++j) {
    double w = 1.0;
    for (long m = 0; m < 4; ++m) {
      if (m != j) w *= (pos - static_cast<double>(i0 + m)) / static_cast<double>(j - m);
    }
    out += w * y[static_cast<std::size_t>(i0 + j)];
  }
  return out;
}

}  // namespace detail

/// Analyzing wavelet truncated to (-alpha/2, alpha/2).
///
/// The truncated function is re-centred (mean removed) and re-scaled to unit
/// L2 norm, so zero mean and unit energy hold for the function actually used.
/// Cheap to copy: the tabulated samples are shared.
class Wavelet {
 public:
  /// Simpson subintervals for every integral over the wavelet support.
  static constexpr std::size_t kQuadratureIntervals = 4096;

  /// pi^{-1/4} exp(-t^2/2) exp(i 2 pi t)
  static Wavelet morlet(double alpha = 8.0) {
    return Wavelet(make(WaveletKind::Morlet, alpha, true, {}));
  }

  /// (2/sqrt 3) pi^{-1/4} (1 - t^2) exp(-t^2/2)
  static Wavelet mexican_hat(double alpha = 10.0) {
    return Wavelet(make(WaveletKind::MexicanHat, alpha, false, {}));
  }

  /// Samples uniformly spaced on [-alpha/2, alpha/2], endpoints included.
  static Wavelet tabulated(std::vector<cplx> samples, double alpha,
                           bool is_complex) {
    if (samples.size() < 8) {
      throw ConfigError("tabulated wavelet needs at least 8 samples");
    }
    return Wavelet(
        make(WaveletKind::Tabulated, alpha, is_complex, std::move(samples)));
  }

  /// Two-column (t, re) or three-column (t, re, im) CSV on a uniform grid
  /// symmetric about zero. Lines starting with '#' are skipped.
  static Wavelet read_csv(std::istream& in) {
    std::vector<double> ts;
    std::vector<cplx> ys;
    std::string line;
    std::size_t lineno = 0;
    int columns = 0;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty() || line[0] == '#') continue;
      for (char& ch : line) {
        if (ch == ',') ch = ' ';
      }
      std::istringstream ss(line);
      std::vector<double> vals;
      double v;
      while (ss >> v) vals.push_back(v);
      if (!ss.eof()) throw ParseError(lineno, "non-numeric field");
      if (vals.size() < 2 || vals.size() > 3) {
        throw ParseError(lineno, "expected 2 or 3 columns");
      }
      if (columns == 0) columns = static_cast<int>(vals.size());
      if (static_cast<int>(vals.size()) != columns) {
        throw ParseError(lineno, "inconsistent column count");
      }
      ts.push_back(vals[0]);
      ys.emplace_back(vals[1], columns == 3 ? vals[2] : 0.0);
    }
    if (ts.size() < 8) throw DataError("tabulated wavelet needs >= 8 rows");
    const double h = (ts.back() - ts.front()) / static_cast<double>(ts.size() - 1);
    if (!(h > 0.0)) throw DataError("wavelet grid must be increasing");
    for (std::size_t k = 0; k < ts.size(); ++k) {
      const double expect = ts.front() + h * static_cast<double>(k);
      if (std::abs(ts[k] - expect) > 1e-6 * h) {
        throw DataError("wavelet grid is not uniform at row " + std::to_string(k + 1));
      }
    }
    const double alpha = ts.back() - ts.front();
    if (std::abs(ts.back() + ts.front()) > 1e-6 * alpha) {
      throw DataError("wavelet grid must be symmetric about t = 0");
    }
    return tabulated(std::move(ys), alpha, columns == 3);
  }

  static Wavelet load_csv(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw DataError("cannot open wavelet file " + path.string());
    return read_csv(in);
  }

  WaveletKind kind() const noexcept { return d_->kind; }
  double alpha() const noexcept { return d_->alpha; }
  bool is_complex() const noexcept { return d_->is_complex; }
  double norm_scale() const noexcept { return d_->scale; }
  cplx mean_offset() const noexcept { return d_->offset; }

  std::string name() const {
    switch (d_->kind) {
      case WaveletKind::Morlet: return "morlet";
      case WaveletKind::MexicanHat: return "mexhat";
      case WaveletKind::Tabulated: return "tabulated";
    }
    return "unknown";
  }

  /// Frequency of the complex carrier factored out of eigen-wavelets before
  /// interpolation (1 for Morlet, 0 otherwise).
  double carrier_frequency() const noexcept {
    return d_->kind == WaveletKind::Morlet ? 1.0 : 0.0;
  }

  /// Uncorrected, untruncated formula (interpolated samples for Tabulated).
  cplx raw(double t) const { return raw_impl(*d_, t); }

  /// Truncated, mean-corrected, unit-norm wavelet; 0 outside the support.
  cplx operator()(double t) const {
    if (std::abs(t) > 0.5 * d_->alpha) return {0.0, 0.0};
    return d_->scale * (raw_impl(*d_, t) - d_->offset);
  }

  std::vector<cplx> sample(std::size_t points) const {
    std::vector<cplx> out(points);
    const double lo = -0.5 * alpha();
    const double h = alpha() / static_cast<double>(points - 1);
    for (std::size_t k = 0; k < points; ++k) out[k] = (*this)(lo + h * static_cast<double>(k));
    return out;
  }

 private:
  explicit Wavelet(std::shared_ptr<const detail::WaveletData> d) : d_(std::move(d)) {}

  static cplx raw_impl(const detail::WaveletData& d, double t) {
    using std::numbers::pi;
    switch (d.kind) {
      case WaveletKind::Morlet:
        return std::pow(pi, -0.25) * std::exp(-0.5 * t * t) *
               std::polar(1.0, 2.0 * pi * t);
      case WaveletKind::MexicanHat:
        return {2.0 / std::sqrt(3.0) * std::pow(pi, -0.25) * (1.0 - t * t) *
                    std::exp(-0.5 * t * t),
                0.0};
      case WaveletKind::Tabulated:
        if (std::abs(t) > 0.5 * d.alpha) return {0.0, 0.0};
        return detail::interpolate_uniform(d.samples, -0.5 * d.alpha,
                                           0.5 * d.alpha, t);
    }
    return {0.0, 0.0};
  }

  static std::shared_ptr<const detail::WaveletData> make(
      WaveletKind kind, double alpha, bool is_complex, std::vector<cplx> samples) {
    if (!(alpha > 0.0) || !std::isfinite(alpha)) {
      throw ConfigError("wavelet support alpha must be positive");
    }
    auto d = std::make_shared<detail::WaveletData>();
    d->kind = kind;
    d->alpha = alpha;
    d->is_complex = is_complex;
    d->samples = std::move(samples);
    const double lo = -0.5 * alpha;
    const double hi = 0.5 * alpha;
    const cplx mean = simpson([&](double t) { return raw_impl(*d, t); }, lo, hi,
                              kQuadratureIntervals);
    d->offset = mean / alpha;
    if (!is_complex) d->offset = {d->offset.real(), 0.0};
    const double energy = simpson(
        [&](double t) { return std::norm(raw_impl(*d, t) - d->offset); }, lo, hi,
        kQuadratureIntervals);
    if (!(energy > 0.0)) throw ConfigError("wavelet has zero energy");
    d->scale = 1.0 / std::sqrt(energy);
    return d;
  }

  std::shared_ptr<const detail::WaveletData> d_;
};

/// psi_{a,b}(t) = a^{-1/2} psi((t - b)/a)
struct ScaledWavelet {
  Wavelet base;
  double a = 1.0;
  double b = 0.0;

  cplx operator()(double t) const { return base((t - b) / a) / std::sqrt(a); }
  double support_lo() const { return b - 0.5 * a * base.alpha(); }
  double support_hi() const { return b + 0.5 * a * base.alpha(); }
};

inline cplx evaluate(const ScaledWavelet& w, double t) {
  if (!(w.a > 0.0)) throw ConfigError("scale a must be positive");
  return w(t);
}

/// ∫ psi(t) dt over the support.
inline cplx integral(const Wavelet& w) {
  return simpson([&](double t) { return w(t); }, -0.5 * w.alpha(), 0.5 * w.alpha(),
                 Wavelet::kQuadratureIntervals);
}

/// ∫ |psi(t)|^2 dt over the support.
inline double energy(const Wavelet& w) {
  return simpson([&](double t) { return std::norm(w(t)); }, -0.5 * w.alpha(),
                 0.5 * w.alpha(), Wavelet::kQuadratureIntervals);
}

/// Psi(f) = ∫ psi(t) exp(-i 2 pi f t) dt
inline cplx fourier_transform(const Wavelet& w, double f) {
  using std::numbers::pi;
  return simpson([&](double t) { return w(t) * std::polar(1.0, -2.0 * pi * f * t); },
                 -0.5 * w.alpha(), 0.5 * w.alpha(), Wavelet::kQuadratureIntervals);
}

/// f0 = ∫_0^∞ f |Psi(f)|^2 df, with |Psi|^2 from a quadrature Fourier
/// transform of the truncated wavelet.
inline double central_frequency(const Wavelet& w, double f_max = 10.0,
                                std::size_t intervals = 2000) {
  return simpson([&](double f) { return f * std::norm(fourier_transform(w, f)); },
                 0.0, f_max, intervals);
}

/// P(x) = ∫ psi(t) psi*(t - x) dt
inline cplx autocorrelation(const Wavelet& w, double x) {
  const double half = 0.5 * w.alpha();
  const double lo = std::max(-half, x - half);
  const double hi = std::min(half, x + half);
  if (hi <= lo) return {0.0, 0.0};
  return simpson([&](double t) { return w(t) * std::conj(w(t - x)); }, lo, hi,
                 Wavelet::kQuadratureIntervals);
}

}  // namespace pwav
