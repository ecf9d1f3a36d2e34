#pragma once

// Monte Carlo studies shared by the `reproduce` CLI command and the
// acceptance suite. Every study is deterministic given its master seed:
// replicate r uses derive_seed(seed, r).

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <vector>

#include <boost/math/special_functions/beta.hpp>
#include <Eigen/Dense>

#include "pwav/eigensys.hpp"
#include "pwav/inference.hpp"
#include "pwav/kernel.hpp"
#include "pwav/parallel.hpp"
#include "pwav/pointproc.hpp"
#include "pwav/random.hpp"
#include "pwav/spectra.hpp"
#include "pwav/stats.hpp"
#include "pwav/wavelet.hpp"

namespace pwav::studies {

/// Default master seed for all canned studies.
inline constexpr std::uint64_t kDefaultSeed = 20261015;

inline std::shared_ptr<const SmoothedKernel> rect_kernel(const Wavelet& psi, double kappa,
                                                         std::size_t n_points = 512) {
  return std::make_shared<const SmoothedKernel>(
      SmoothedKernel::build(psi, SmoothingWindow::rectangular(kappa), n_points));
}

// ---------------------------------------------------------------- kernel

/// Largest |analytic - quadrature| of the Morlet + rectangular kernel on a
/// side x side midpoint grid over the support square.
inline double kernel_equivalence(double kappa, std::size_t side = 50) {
  const Wavelet psi = Wavelet::morlet();
  const SmoothingWindow h = SmoothingWindow::rectangular(kappa);
  const double width = psi.alpha() + kappa;
  double worst = 0.0;
  for (std::size_t i = 0; i < side; ++i) {
    for (std::size_t j = 0; j < side; ++j) {
      const double s = -0.5 * width + (static_cast<double>(i) + 0.5) * width / static_cast<double>(side);
      const double t = -0.5 * width + (static_cast<double>(j) + 0.5) * width / static_cast<double>(side);
      worst = std::max(worst, std::abs(morlet_rect_kernel(psi, kappa, s, t) -
                                       kernel_value(psi, h, s, t)));
    }
  }
  return worst;
}

// ---------------------------------------------------------------- dof

struct DofRow {
  std::string wavelet;
  double kappa = 0.0;
  double eigen_sum = 0.0;
  double rectangular_exact = 0.0;
  double closed_form = 0.0;  // NaN when kappa <= alpha
  std::size_t rank = 0;
};

inline DofRow dof_row(const Wavelet& psi, double kappa, double cutoff = 1.0 - 1e-8) {
  const auto e = nystrom_decompose(rect_kernel(psi, kappa), cutoff);
  DofRow r;
  r.wavelet = psi.name();
  r.kappa = kappa;
  r.eigen_sum = degrees_of_freedom(e);
  r.rectangular_exact = dof_rectangular_exact(psi, kappa);
  r.closed_form = kappa > psi.alpha() ? dof_closed_form(psi, kappa)
                                      : std::numeric_limits<double>::quiet_NaN();
  r.rank = e.rank();
  return r;
}

// ---------------------------------------------------------------- paths

struct PathEquivalence {
  double worst_relative = 0.0;
  std::size_t configurations = 0;
};

/// Direct double sum vs eigen expansion on random Poisson / Hawkes streams at
/// random interior (a, b); Morlet and Mexican hat alternate.
inline PathEquivalence path_equivalence(std::size_t configurations, std::uint64_t seed,
                                        double cutoff = 1.0 - 1e-8) {
  const std::vector<Wavelet> wavelets{Wavelet::morlet(), Wavelet::mexican_hat()};
  std::vector<EigenSystem> systems;
  for (const auto& w : wavelets) systems.push_back(nystrom_decompose(rect_kernel(w, 10.0), cutoff));
  std::vector<double> rel(configurations);
  parallel_for(configurations, [&](std::size_t r) {
    Rng rng(derive_seed(seed, r));
    const auto& e = systems[r % 4 == 3 ? 1 : 0];
    const double T = 100.0 + 100.0 * rng.uniform();
    const std::uint64_t sim_seed = derive_seed(seed ^ 0xA5A5A5A5ULL, r);
    EventStream n;
    if (r % 2 == 0) {
      n = simulate_poisson({0.5 + 1.5 * rng.uniform(), 0.5 + 1.5 * rng.uniform()}, T, sim_seed);
    } else {
      HawkesParams h;
      h.nu = Eigen::Vector2d(0.5, 0.5);
      h.alpha.resize(2, 2);
      h.alpha << 0.3, 0.2, 0.2, 0.3;
      h.beta = Eigen::MatrixXd::Constant(2, 2, 1.0);
      n = simulate_hawkes(h, T, sim_seed);
    }
    const double width = e.kernel->support_width();
    const double a = (0.03 + 0.2 * rng.uniform()) * T / width;
    const double half = 0.5 * a * width;
    const double b = half + (T - 2.0 * half) * rng.uniform();
    const auto d = smoothed_periodogram_direct(n, *e.kernel, a, b);
    const auto q = smoothed_periodogram_eigen(n, e, a, b);
    rel[r] = d.norm() > 0.0 ? (d - q).norm() / d.norm() : (d - q).norm();
  });
  return {*std::max_element(rel.begin(), rel.end()), configurations};
}

// ---------------------------------------------------------------- mean

struct MeanSpectrum {
  std::vector<double> draws;
  double mean = 0.0;
  double standard_error = 0.0;
  double target = 0.0;
};

/// Ω11 at (ã, b̃) = (1/2, 1/2) for Poisson(rate) over `replicates` streams.
inline MeanSpectrum mean_spectrum(double rate, double T, double kappa, std::size_t replicates,
                                  std::uint64_t seed) {
  const auto e = nystrom_decompose(rect_kernel(Wavelet::morlet(), kappa));
  const auto rc = denormalize_coords(0.5, 0.5, T, e.kernel->alpha(), kappa);
  MeanSpectrum m;
  m.target = rate;
  m.draws.resize(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    const auto n = simulate_poisson({rate}, T, derive_seed(seed, r));
    m.draws[r] = smoothed_periodogram_eigen(n, e, rc.a, rc.b)(0, 0).real();
  });
  m.mean = stats::mean(m.draws);
  m.standard_error = stats::standard_error(m.draws);
  return m;
}

// ---------------------------------------------------------------- CWT normality

enum class Process { Poisson, Hawkes };

struct CwtNormality {
  std::vector<double> re;
  std::vector<double> im;  // empty for real wavelets
  double qq_re = 0.0;
  double qq_im = std::numeric_limits<double>::quiet_NaN();
  double qq_min() const { return std::isnan(qq_im) ? qq_re : std::min(qq_re, qq_im); }
};

/// w(a, b) at ã = 4/5 (normalised with α + κ), b̃ = 1/2 for a univariate
/// Poisson(1) or Hawkes(ν=1, α=0.5, β=1) stream.
inline CwtNormality cwt_normality(const Wavelet& psi, Process proc, double T, double kappa,
                                  std::size_t replicates, std::uint64_t seed) {
  const auto rc = denormalize_coords(0.8, 0.5, T, psi.alpha(), kappa);
  const HawkesParams hp = HawkesParams::univariate(1.0, 0.5, 1.0);
  CwtNormality out;
  out.re.resize(replicates);
  if (psi.is_complex()) out.im.resize(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    const auto s = derive_seed(seed, r);
    const auto n = proc == Process::Poisson ? simulate_poisson({1.0}, T, s)
                                            : simulate_hawkes(hp, T, s);
    const cplx w = cwt(n, psi, rc.a, rc.b)(0);
    out.re[r] = w.real();
    if (psi.is_complex()) out.im[r] = w.imag();
  });
  out.qq_re = stats::qq_correlation_normal(out.re);
  if (psi.is_complex()) out.qq_im = stats::qq_correlation_normal(out.im);
  return out;
}

// ---------------------------------------------------------------- coherence

struct CoherenceStudy {
  std::vector<double> draws;
  std::size_t undefined = 0;  // replicates with an empty diagonal
  double dof = 0.0;
  double rho2 = 0.0;
  Flavor flavor = Flavor::ComplexWavelet;
  double ks_statistic = 0.0;
  double ks_p = 0.0;
  double qq_correlation = 0.0;  // against the reference quantiles
  double a = 0.0;
  double b = 0.0;
};

namespace detail {

inline void finish_coherence(CoherenceStudy& s) {
  const CoherenceDistribution dist(s.dof, s.rho2, s.flavor);
  const auto ks = stats::ks_test(s.draws, [&](double x) { return dist.cdf(x); });
  s.ks_statistic = ks.statistic;
  s.ks_p = ks.p_value;
  if (s.rho2 == 0.0) {
    std::vector<double> sorted = s.draws;
    std::sort(sorted.begin(), sorted.end());
    const double pa = s.flavor == Flavor::ComplexWavelet ? 1.0 : 0.5;
    const double pb = s.flavor == Flavor::ComplexWavelet ? s.dof - 1.0 : 0.5 * (s.dof - 1.0);
    std::vector<double> q(sorted.size());
    for (std::size_t k = 0; k < q.size(); ++k) {
      q[k] = boost::math::ibeta_inv(pa, pb, (static_cast<double>(k) + 0.5) /
                                                static_cast<double>(q.size()));
    }
    s.qq_correlation = stats::correlation(sorted, q);
  }
}

template <typename Sim>
CoherenceStudy coherence_draws(const EigenSystem& e, double a, double b, std::size_t replicates,
                               std::uint64_t seed, Sim&& simulate) {
  CoherenceStudy s;
  s.dof = degrees_of_freedom(e);
  s.flavor = flavor_of(e.kernel->wavelet());
  s.a = a;
  s.b = b;
  std::vector<double> raw(replicates, std::numeric_limits<double>::quiet_NaN());
  parallel_for(replicates, [&](std::size_t r) {
    const auto n = simulate(derive_seed(seed, r));
    const auto omega = smoothed_periodogram_eigen(n, e, a, b);
    if (omega(0, 0).real() > 0.0 && omega(1, 1).real() > 0.0) raw[r] = coherence(omega, 0, 1);
  });
  for (double v : raw) {
    if (std::isnan(v)) {
      ++s.undefined;
    } else {
      s.draws.push_back(v);
    }
  }
  return s;
}

}  // namespace detail

/// Null coherence of an independent Poisson(1) pair at ã = 4/5, b̃ = 1/2.
inline CoherenceStudy null_coherence(const Wavelet& psi, double kappa, double T,
                                     std::size_t replicates, std::uint64_t seed) {
  const auto e = nystrom_decompose(rect_kernel(psi, kappa));
  const auto rc = denormalize_coords(0.8, 0.5, T, psi.alpha(), kappa);
  auto s = detail::coherence_draws(e, rc.a, rc.b, replicates, seed, [&](std::uint64_t sd) {
    return simulate_poisson({1.0, 1.0}, T, sd);
  });
  detail::finish_coherence(s);
  return s;
}

/// Mutually exciting bivariate Hawkes: ν = (1, 1), α11 = α22 = 0.5,
/// α12 = α21 = 0.4, β = 1.
inline HawkesParams mutual_hawkes() {
  HawkesParams h;
  h.nu = Eigen::Vector2d(1.0, 1.0);
  h.alpha.resize(2, 2);
  h.alpha << 0.5, 0.4, 0.4, 0.5;
  h.beta = Eigen::MatrixXd::Constant(2, 2, 1.0);
  return h;
}

/// Coherence seen by the scale-a wavelet: |S̄12|² / (S̄11 S̄22) with
/// S̄ = ∫ a |Ψ(a f)|² S(f) df = ∫ |Ψ(g)|² S(g/a) dg (the large-T mean of Ω).
class BandCoherence {
 public:
  BandCoherence(HawkesParams h, const Wavelet& psi) : h_(std::move(h)) {
    // |Psi(g)| is negligible beyond |g| = f_c + 6 for the built-in wavelets
    gmax_ = psi.carrier_frequency() + 6.0;
    response_.resize(kIntervals + 1);
    for (std::size_t k = 0; k <= kIntervals; ++k) {
      response_[k] = std::norm(fourier_transform(psi, node(k)));
    }
  }

  double operator()(double a) const {
    Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(2, 2);
    const double dg = 2.0 * gmax_ / static_cast<double>(kIntervals);
    for (std::size_t k = 0; k <= kIntervals; ++k) {
      acc += simpson_weight(k, kIntervals, dg) * response_[k] * hawkes_spectrum(h_, node(k) / a);
    }
    return std::norm(acc(0, 1)) / (acc(0, 0).real() * acc(1, 1).real());
  }

 private:
  static constexpr std::size_t kIntervals = 1200;
  double node(std::size_t k) const {
    return -gmax_ + 2.0 * gmax_ * static_cast<double>(k) / static_cast<double>(kIntervals);
  }
  HawkesParams h_;
  double gmax_ = 0.0;
  std::vector<double> response_;
};

/// Scale at which band_coherence equals `target` (bisection on log a; the
/// coherence grows with scale for the mutually exciting design).
inline double scale_for_coherence(const HawkesParams& h, const Wavelet& psi, double target) {
  const BandCoherence band(h, psi);
  double lo = 0.5;
  double hi = 200.0;
  for (int it = 0; it < 60; ++it) {
    const double mid = std::sqrt(lo * hi);
    (band(mid) < target ? lo : hi) = mid;
  }
  return std::sqrt(lo * hi);
}

/// Coherence of the mutually exciting Hawkes pair at ã = 4/5, b̃ = 1/2 with
/// T chosen so the true band coherence equals rho2.
inline CoherenceStudy alternative_coherence(double rho2, double kappa, std::size_t replicates,
                                            std::uint64_t seed) {
  const Wavelet psi = Wavelet::morlet();
  const HawkesParams h = mutual_hawkes();
  const double a = scale_for_coherence(h, psi, rho2);
  const double T = a * (psi.alpha() + kappa) / 0.8;
  const auto e = nystrom_decompose(rect_kernel(psi, kappa));
  auto s = detail::coherence_draws(e, a, 0.5 * T, replicates, seed, [&](std::uint64_t sd) {
    return simulate_hawkes(h, T, sd);
  });
  s.rho2 = BandCoherence(h, psi)(a);
  detail::finish_coherence(s);
  return s;
}

// ---------------------------------------------------------------- test

struct RejectionStudy {
  std::vector<StationarityReport> reports;
  std::vector<double> rejection_rate;  // per scale j = 1..J
  std::vector<std::size_t> na_count;
  std::size_t replicates = 0;
};

template <typename Sim>
RejectionStudy rejection_study(const StationarityConfig& cfg, double T, std::size_t replicates,
                               std::uint64_t seed, double level, Sim&& simulate) {
  const auto e = stationarity_eigensystem(cfg, T);
  RejectionStudy st;
  st.replicates = replicates;
  st.reports.resize(replicates);
  parallel_for(replicates, [&](std::size_t r) {
    st.reports[r] = stationarity_test(simulate(derive_seed(seed, r)), e, cfg);
  });
  st.rejection_rate.assign(static_cast<std::size_t>(cfg.J), 0.0);
  st.na_count.assign(static_cast<std::size_t>(cfg.J), 0);
  for (const auto& rep : st.reports) {
    for (std::size_t j = 0; j < rep.scales.size(); ++j) {
      if (rep.scales[j].na) {
        ++st.na_count[j];
      } else if (rep.scales[j].p_value < level) {
        st.rejection_rate[j] += 1.0;
      }
    }
  }
  for (auto& v : st.rejection_rate) v /= static_cast<double>(replicates);
  return st;
}

/// Three-segment design on (0, 1500]: independent self-exciting components
/// (ν = 0.5, α = 0.7, β = 1) on the outer thirds, mutually exciting
/// (α11 = α22 = 0.2, α12 = α21 = 0.5) on (500, 1000].
inline std::vector<HawkesSegment> piecewise_design() {
  HawkesParams ind;
  ind.nu = Eigen::Vector2d(0.5, 0.5);
  ind.alpha = Eigen::MatrixXd::Zero(2, 2);
  ind.alpha(0, 0) = ind.alpha(1, 1) = 0.7;
  ind.beta = Eigen::MatrixXd::Constant(2, 2, 1.0);
  HawkesParams mut = ind;
  mut.alpha << 0.2, 0.5, 0.5, 0.2;
  return {{0.0, 500.0, ind}, {500.0, 1000.0, mut}, {1000.0, 1500.0, ind}};
}

inline RejectionStudy test_size(std::size_t replicates, std::uint64_t seed, double T = 1500.0,
                                int J = 3) {
  StationarityConfig cfg;
  cfg.J = J;
  return rejection_study(cfg, T, replicates, seed, 0.05, [&](std::uint64_t sd) {
    return simulate_poisson({2.0, 2.0}, T, sd);
  });
}

inline RejectionStudy test_power(std::size_t replicates, std::uint64_t seed, int J = 3) {
  StationarityConfig cfg;
  cfg.J = J;
  const auto segs = piecewise_design();
  return rejection_study(cfg, 1500.0, replicates, seed, 0.05, [&](std::uint64_t sd) {
    return simulate_piecewise(segs, sd);
  });
}

}  // namespace pwav::studies
