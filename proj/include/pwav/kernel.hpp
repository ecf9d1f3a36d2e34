#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "pwav/error.hpp"
#include "pwav/quadrature.hpp"
#include "pwav/special.hpp"
#include "pwav/wavelet.hpp"

namespace pwav {

enum class WindowKind { Rectangular, Tabulated, Dirac };

/// Time-smoothing window h_kappa(t) = h(t/kappa)/kappa with h supported on
/// (-1/2, 1/2), symmetric, non-negative and integrating to one.
///
/// Dirac is the kappa -> 0 limit (no smoothing); its kernel is rank one.
class SmoothingWindow {
 public:
  static SmoothingWindow rectangular(double kappa) {
    check_kappa(kappa);
    SmoothingWindow w;
    w.kind_ = WindowKind::Rectangular;
    w.kappa_ = kappa;
    return w;
  }

  static SmoothingWindow dirac() {
    SmoothingWindow w;
    w.kind_ = WindowKind::Dirac;
    w.kappa_ = 0.0;
    return w;
  }

  /// Uniform samples of h on [-1/2, 1/2] (endpoints included). Symmetrised
  /// and renormalised to unit integral.
  static SmoothingWindow tabulated(std::vector<double> samples, double kappa) {
    check_kappa(kappa);
    if (samples.size() < 5) throw ConfigError("tabulated window needs >= 5 samples");
    for (double v : samples) {
      if (!(v >= 0.0)) throw ConfigError("tabulated window must be non-negative");
    }
    const std::size_t n = samples.size();
    for (std::size_t k = 0; k < n / 2; ++k) {
      const double m = 0.5 * (samples[k] + samples[n - 1 - k]);
      samples[k] = samples[n - 1 - k] = m;
    }
    SmoothingWindow w;
    w.kind_ = WindowKind::Tabulated;
    w.kappa_ = kappa;
    w.samples_ = std::make_shared<std::vector<double>>(std::move(samples));
    const double total = simpson([&](double t) { return w.unit(t); }, -0.5, 0.5, 4096);
    if (!(total > 0.0)) throw ConfigError("tabulated window has zero mass");
    for (double& v : *w.samples_) v /= total;
    return w;
  }

  WindowKind kind() const noexcept { return kind_; }
  double kappa() const noexcept { return kappa_; }

  std::string name() const {
    switch (kind_) {
      case WindowKind::Rectangular: return "rectangular";
      case WindowKind::Tabulated: return "tabulated";
      case WindowKind::Dirac: return "dirac";
    }
    return "unknown";
  }

  /// h_kappa(u); not defined for Dirac.
  double operator()(double u) const {
    if (kind_ == WindowKind::Dirac) throw ConfigError("Dirac window has no density");
    return unit(u / kappa_) / kappa_;
  }

 private:
  static void check_kappa(double kappa) {
    if (!(kappa > 0.0) || !std::isfinite(kappa)) {
      throw ConfigError("smoothing width kappa must be positive");
    }
  }

  double unit(double t) const {
    if (std::abs(t) > 0.5) return 0.0;
    if (kind_ == WindowKind::Rectangular) return 1.0;
    const auto& y = *samples_;
    const double pos = (t + 0.5) * static_cast<double>(y.size() - 1);
    const auto k = std::min(static_cast<std::size_t>(pos), y.size() - 2);
    const double f = pos - static_cast<double>(k);
    return (1.0 - f) * y[k] + f * y[k + 1];
  }

  WindowKind kind_ = WindowKind::Rectangular;
  double kappa_ = 1.0;
  std::shared_ptr<std::vector<double>> samples_;
};

/// Simpson subintervals for the u-integral defining the kernel.
inline constexpr std::size_t kKernelIntervals = 1024;

/// K(s,t) = ∫ h_kappa(u) psi(s-u) psi*(t-u) du by Simpson quadrature over
/// supp(h_kappa) ∩ (s - supp psi) ∩ (t - supp psi).
inline cplx kernel_value(const Wavelet& psi, const SmoothingWindow& h, double s,
                         double t) {
  if (h.kind() == WindowKind::Dirac) return psi(s) * std::conj(psi(t));
  const double half = 0.5 * psi.alpha();
  const double lo = std::max({-0.5 * h.kappa(), s - half, t - half});
  const double hi = std::min({0.5 * h.kappa(), s + half, t + half});
  if (!(hi > lo)) return {0.0, 0.0};
  return simpson([&](double u) { return h(u) * psi(s - u) * std::conj(psi(t - u)); },
                 lo, hi, kKernelIntervals);
}

/// Closed form for the untruncated Morlet wavelet and rectangular window:
/// (2κ)^{-1} e^{-(t-s)²/4} [erf((κ-(t+s))/2) + erf((κ+(t+s))/2)] e^{i2π(s-t)}.
inline cplx morlet_rect_kernel_ideal(double kappa, double s, double t) {
  using std::numbers::pi;
  const double d = t - s;
  const double m = t + s;
  const double k = std::exp(-0.25 * d * d) *
                   (std::erf(0.5 * (kappa - m)) + std::erf(0.5 * (kappa + m))) /
                   (2.0 * kappa);
  return k * std::polar(1.0, 2.0 * pi * (s - t));
}

/// Exact kernel of the truncated, mean-corrected Morlet wavelet `psi`
/// (as built by Wavelet::morlet) with a rectangular window, via the real and
/// complex error functions. Agrees with kernel_value to quadrature accuracy.
inline cplx morlet_rect_kernel(const Wavelet& psi, double kappa, double s, double t) {
  using std::numbers::pi;
  const double half = 0.5 * psi.alpha();
  const double lo = std::max({-0.5 * kappa, s - half, t - half});
  const double hi = std::min({0.5 * kappa, s + half, t + half});
  if (!(hi > lo)) return {0.0, 0.0};
  const double c = psi.norm_scale();
  const cplx m = psi.mean_offset();
  const double mid = 0.5 * (s + t);
  const double d = s - t;
  // ∫ r(s-u) r*(t-u) du with r the raw Morlet
  const cplx gauss = std::pow(pi, -0.5) * std::exp(-0.25 * d * d) * 0.5 *
                     std::sqrt(pi) * (std::erf(hi - mid) - std::erf(lo - mid)) *
                     std::polar(1.0, 2.0 * pi * d);
  // ∫ r(x-u) du = pi^{-1/4} ∫_{x-hi}^{x-lo} e^{-v²/2} e^{i2πv} dv
  auto linear = [&](double x) {
    return std::pow(pi, -0.25) * special::gauss_chirp_integral(x - hi, x - lo, 2.0 * pi);
  };
  const cplx total = gauss - std::conj(m) * linear(s) - m * std::conj(linear(t)) +
                     std::norm(m) * (hi - lo);
  return c * c * total / kappa;
}

enum class KernelMethod { Auto, Analytic, Quadrature };

/// The Hermitian kernel K(s,t) of a wavelet/window pair, sampled on the
/// midpoint grid used for the Nystrom eigendecomposition.
class SmoothedKernel {
 public:
  static constexpr std::size_t kDefaultPoints = 512;

  static SmoothedKernel build(const Wavelet& psi, const SmoothingWindow& h,
                              std::size_t n_points = kDefaultPoints,
                              KernelMethod method = KernelMethod::Auto) {
    if (n_points < 2) throw ConfigError("kernel grid needs at least 2 points");
    const bool analytic_ok =
        psi.kind() == WaveletKind::Morlet && h.kind() == WindowKind::Rectangular;
    if (method == KernelMethod::Analytic && !analytic_ok) {
      throw ConfigError("analytic kernel only available for Morlet + rectangular");
    }
    SmoothedKernel k;
    k.psi_ = psi;
    k.window_ = h;
    k.analytic_ = method == KernelMethod::Auto ? analytic_ok
                                                : method == KernelMethod::Analytic;
    const double width = k.support_width();
    const double step = width / static_cast<double>(n_points);
    k.grid_.resize(static_cast<Eigen::Index>(n_points));
    for (std::size_t j = 0; j < n_points; ++j) {
      k.grid_(static_cast<Eigen::Index>(j)) =
          -0.5 * width + (static_cast<double>(j) + 0.5) * step;
    }
    const auto n = static_cast<Eigen::Index>(n_points);
    k.values_.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i; j < n; ++j) {
        const cplx v = k(k.grid_(i), k.grid_(j));
        k.values_(i, j) = v;
        k.values_(j, i) = std::conj(v);
      }
      k.values_(i, i) = k.values_(i, i).real();
    }
    return k;
  }

  const Wavelet& wavelet() const noexcept { return psi_; }
  const SmoothingWindow& window() const noexcept { return window_; }
  double alpha() const noexcept { return psi_.alpha(); }
  double kappa() const noexcept { return window_.kappa(); }
  bool analytic() const noexcept { return analytic_; }

  /// alpha + kappa: side of the support square of K.
  double support_width() const noexcept { return psi_.alpha() + window_.kappa(); }

  const Eigen::VectorXd& grid() const noexcept { return grid_; }
  double weight() const noexcept {
    return support_width() / static_cast<double>(grid_.size());
  }
  const Eigen::MatrixXcd& values() const noexcept { return values_; }

  /// K(s,t) evaluated directly (not from the grid).
  cplx operator()(double s, double t) const {
    const double half = 0.5 * support_width();
    if (std::abs(s) > half || std::abs(t) > half) return {0.0, 0.0};
    if (analytic_) return morlet_rect_kernel(psi_, window_.kappa(), s, t);
    return kernel_value(psi_, window_, s, t);
  }

  /// Largest |K - K^H| entry on the grid.
  double asymmetry() const { return (values_ - values_.adjoint()).cwiseAbs().maxCoeff(); }

 private:
  Wavelet psi_ = Wavelet::morlet();
  SmoothingWindow window_ = SmoothingWindow::rectangular(1.0);
  bool analytic_ = false;
  Eigen::VectorXd grid_;
  Eigen::MatrixXcd values_;
};

/// K_{a,b}(s,t) = a^{-1} K((s-b)/a, (t-b)/a)
inline cplx scaled_kernel_value(const SmoothedKernel& k, double a, double b, double s,
                                double t) {
  if (!(a > 0.0)) throw ConfigError("scale a must be positive");
  return k((s - b) / a, (t - b) / a) / a;
}

/// Cone of influence: the isosceles triangle of (a, b) whose kernel support
/// (b - a(α+κ)/2, b + a(α+κ)/2) lies inside (0, T].
struct ValidRegion {
  double alpha = 8.0;
  double kappa = 0.0;
  double horizon = 1.0;

  ValidRegion(double alpha_, double kappa_, double horizon_)
      : alpha(alpha_), kappa(kappa_), horizon(horizon_) {
    if (!(horizon > 0.0)) throw ConfigError("horizon T must be positive");
  }

  double width() const noexcept { return alpha + kappa; }
  double a_max() const noexcept { return horizon / width(); }

  /// Inequalities checked with a relative slack of 1e-12 so dyadic
  /// boundary points are members.
  bool contains(double a, double b) const noexcept {
    if (!(a > 0.0)) return false;
    const double r = 0.5 * a * width();
    const double tol = 1e-12 * horizon;
    return b - r >= -tol && b + r <= horizon + tol;
  }
};

inline ValidRegion valid_region(double alpha, double kappa, double T) {
  return ValidRegion(alpha, kappa, T);
}

}  // namespace pwav
