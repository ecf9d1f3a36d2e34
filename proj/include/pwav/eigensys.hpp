#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <memory>
#include <numbers>
#include <vector>

#include <Eigen/Dense>

#include "pwav/error.hpp"
#include "pwav/kernel.hpp"
#include "pwav/quadrature.hpp"
#include "pwav/wavelet.hpp"

namespace pwav {

/// Energy cutoff used for periodogram computation.
inline constexpr double kDefaultEnergyCutoff = 1.0 - 1e-6;

/// Nystrom eigensystem {eta_l, phi_l} of a smoothed kernel.
///
/// Eigenvalues are the raw quadrature eigenvalues (they sum to the discrete
/// trace, ~1); `energy_fraction` and the degrees of freedom use eigenvalues
/// normalised by the total.
struct EigenSystem {
  std::shared_ptr<const SmoothedKernel> kernel;
  Eigen::VectorXd eigenvalues;   // retained, descending, clamped at 0
  double total = 0.0;            // sum of all clamped eigenvalues
  double energy_cutoff = 1.0;
  Eigen::MatrixXcd vectors;      // n x r, phi_l(s_j); weighted-orthonormal
  Eigen::MatrixXcd envelopes;    // phi_l(s_j) e^{-i 2 pi f_c s_j}
  double carrier = 0.0;

  std::size_t rank() const noexcept { return static_cast<std::size_t>(eigenvalues.size()); }
  const Eigen::VectorXd& grid() const { return kernel->grid(); }
  double weight() const { return kernel->weight(); }
  double half_width() const { return 0.5 * kernel->support_width(); }

  /// eta_l / sum of all eta
  Eigen::VectorXd normalized() const { return eigenvalues / total; }
  double retained_energy() const { return eigenvalues.sum() / total; }
};

/// Solves the quadrature eigenproblem of the sampled kernel (midpoint rule
/// with equal weights w, so w K is Hermitian) and keeps the leading terms
/// whose cumulative energy first reaches `energy_cutoff`.
inline EigenSystem nystrom_decompose(std::shared_ptr<const SmoothedKernel> k,
                                     double energy_cutoff = kDefaultEnergyCutoff) {
  if (!(energy_cutoff > 0.0 && energy_cutoff <= 1.0)) {
    throw ConfigError("energy cutoff must lie in (0, 1]");
  }
  const auto n = k->grid().size();
  if (n < 64) throw ConfigError("Nystrom decomposition needs at least 64 grid points");
  if (k->asymmetry() > 1e-10) {
    throw NumericalError("sampled kernel is not Hermitian");
  }
  const double w = k->weight();
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(w * k->values());
  if (es.info() != Eigen::Success) throw NumericalError("kernel eigensolve failed");
  const Eigen::VectorXd ev = es.eigenvalues().reverse().cwiseMax(0.0);
  const double total = ev.sum();
  if (!(total > 0.0)) throw NumericalError("kernel has no positive eigenvalues");

  Eigen::Index r = 0;
  double acc = 0.0;
  while (r < n) {
    acc += ev(r);
    ++r;
    if (acc >= energy_cutoff * total) break;
  }
  while (r > 1 && ev(r - 1) <= 0.0) --r;

  EigenSystem e;
  e.kernel = std::move(k);
  e.total = total;
  e.energy_cutoff = energy_cutoff;
  e.eigenvalues = ev.head(r);
  e.vectors = es.eigenvectors().rowwise().reverse().leftCols(r) / std::sqrt(w);
  e.carrier = e.kernel->wavelet().carrier_frequency();
  const Eigen::VectorXd& s = e.kernel->grid();
  e.envelopes = e.vectors;
  for (Eigen::Index j = 0; j < n; ++j) {
    const cplx phase = std::polar(1.0, -2.0 * std::numbers::pi * e.carrier * s(j));
    e.envelopes.row(j) *= phase;
  }
  // Fix the arbitrary eigenvector phase: largest envelope entry real positive.
  for (Eigen::Index l = 0; l < r; ++l) {
    Eigen::Index arg = 0;
    e.envelopes.col(l).cwiseAbs().maxCoeff(&arg);
    const cplx z = e.envelopes(arg, l);
    const cplx u = std::abs(z) > 0.0 ? std::conj(z) / std::abs(z) : cplx{1.0, 0.0};
    e.envelopes.col(l) *= u;
    e.vectors.col(l) *= u;
  }
  return e;
}

inline EigenSystem nystrom_decompose(const Wavelet& psi, const SmoothingWindow& h,
                                     std::size_t n_points = SmoothedKernel::kDefaultPoints,
                                     double energy_cutoff = kDefaultEnergyCutoff) {
  return nystrom_decompose(
      std::make_shared<const SmoothedKernel>(SmoothedKernel::build(psi, h, n_points)),
      energy_cutoff);
}

/// n = 1 / Σ eta_l² over retained (normalised) eigenvalues.
inline double degrees_of_freedom(const EigenSystem& e) {
  return 1.0 / e.normalized().squaredNorm();
}

namespace detail {

// ∫ weight(x) |P(x)|² dx over (-lim, lim), P the wavelet autocorrelation.
template <typename Wt>
double autocorr_energy(const Wavelet& psi, double lim, Wt&& weight) {
  return simpson([&](double x) { return weight(x) * std::norm(autocorrelation(psi, x)); },
                 -lim, lim, 1024);
}

}  // namespace detail

/// kappa / ∫|P(x)|² dx. Valid only for a rectangular window with kappa > alpha.
inline double dof_closed_form(const Wavelet& psi, double kappa) {
  if (!(kappa > psi.alpha())) {
    throw ConfigError("closed-form degrees of freedom require kappa > alpha");
  }
  return kappa / detail::autocorr_energy(psi, psi.alpha(), [](double) { return 1.0; });
}

/// Exact value for the rectangular window: Σ eta² = kappa^{-2} ∫ (kappa - |x|)_+ |P(x)|² dx.
inline double dof_rectangular_exact(const Wavelet& psi, double kappa) {
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  const double lim = std::min(kappa, psi.alpha());
  const double s = detail::autocorr_energy(
      psi, lim, [&](double x) { return std::max(kappa - std::abs(x), 0.0); });
  return kappa * kappa / s;
}

namespace detail {

inline constexpr int kInterpOrder = 8;

// Lagrange weights of the kInterpOrder-point stencil around x on the
// midpoint grid; `first` receives the first (possibly out of range) index.
inline void lagrange_stencil(const EigenSystem& e, double x, long& first,
                             double (&wts)[kInterpOrder]) {
  const double w = e.weight();
  const double pos = (x + e.half_width()) / w - 0.5;
  first = static_cast<long>(std::floor(pos)) - kInterpOrder / 2 + 1;
  for (int j = 0; j < kInterpOrder; ++j) {
    double c = 1.0;
    for (int m = 0; m < kInterpOrder; ++m) {
      if (m != j) c *= (pos - static_cast<double>(first + m)) / static_cast<double>(j - m);
    }
    wts[j] = c;
  }
}

}  // namespace detail

/// All retained eigen-wavelets at x (unit scale), by 8-point Lagrange
/// interpolation of the carrier-free envelopes; samples beyond the grid are
/// taken as zero. Writes rank() values into `out`.
inline void eigen_wavelets_at(const EigenSystem& e, double x, cplx* out) {
  const auto r = static_cast<Eigen::Index>(e.rank());
  if (std::abs(x) > e.half_width()) {
    std::fill(out, out + r, cplx{0.0, 0.0});
    return;
  }
  long first = 0;
  double wts[detail::kInterpOrder];
  detail::lagrange_stencil(e, x, first, wts);
  const long n = static_cast<long>(e.envelopes.rows());
  std::fill(out, out + r, cplx{0.0, 0.0});
  for (int j = 0; j < detail::kInterpOrder; ++j) {
    const long idx = first + j;
    if (idx < 0 || idx >= n) continue;
    const cplx* row_base = e.envelopes.data() + idx;  // column-major
    for (Eigen::Index l = 0; l < r; ++l) out[l] += wts[j] * row_base[l * n];
  }
  if (e.carrier != 0.0) {
    const cplx phase = std::polar(1.0, 2.0 * std::numbers::pi * e.carrier * x);
    for (Eigen::Index l = 0; l < r; ++l) out[l] *= phase;
  }
}

/// phi_l(x) by grid interpolation.
inline cplx eigen_wavelet_interpolated(const EigenSystem& e, std::size_t l, double x) {
  if (l >= e.rank()) throw ConfigError("eigen-wavelet index beyond retained rank");
  std::vector<cplx> all(e.rank());
  eigen_wavelets_at(e, x, all.data());
  return all[l];
}

/// Nystrom extension phi_l(x) = eta_l^{-1} Σ_j w K(x, s_j) phi_l(s_j).
inline cplx eigen_wavelet_value(const EigenSystem& e, std::size_t l, double x) {
  if (l >= e.rank()) throw ConfigError("eigen-wavelet index beyond retained rank");
  const auto li = static_cast<Eigen::Index>(l);
  const double eta = e.eigenvalues(li);
  if (!(eta > 0.0)) throw NumericalError("eigenvalue is zero; extension undefined");
  const auto& s = e.grid();
  cplx acc{0.0, 0.0};
  for (Eigen::Index j = 0; j < s.size(); ++j) acc += (*e.kernel)(x, s(j)) * e.vectors(j, li);
  return acc * e.weight() / eta;
}

/// Σ_l eta_l |Phi_l(f)|² with Phi_l the (grid) Fourier transform of phi_l.
inline double effective_frequency_response(const EigenSystem& e, double f) {
  const auto& s = e.grid();
  const Eigen::VectorXd eta = e.normalized();
  double acc = 0.0;
  for (Eigen::Index l = 0; l < eta.size(); ++l) {
    cplx ft{0.0, 0.0};
    for (Eigen::Index j = 0; j < s.size(); ++j) {
      ft += e.vectors(j, l) * std::polar(1.0, -2.0 * std::numbers::pi * f * s(j));
    }
    acc += eta(l) * std::norm(ft * e.weight());
  }
  return acc;
}

}  // namespace pwav
