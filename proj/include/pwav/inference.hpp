#pragma once

#include <cmath>
#include <complex>
#include <limits>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <boost/math/quadrature/tanh_sinh.hpp>
#include <boost/math/special_functions/beta.hpp>
#include <boost/math/special_functions/gamma.hpp>
#include <Eigen/Dense>
#include "json.hpp"

#include "pwav/eigensys.hpp"
#include "pwav/error.hpp"
#include "pwav/kernel.hpp"
#include "pwav/pointproc.hpp"
#include "pwav/spectra.hpp"

namespace pwav {

/// Gauss hypergeometric 2F1(a1, a2; b1; z) by its power series, |z| < 1.
inline double hyp2f1(double a1, double a2, double b1, double z) {
  if (!(b1 > 0.0)) throw ConfigError("hyp2f1: b1 must be positive");
  if (!(std::abs(z) < 1.0)) throw ConfigError("hyp2f1: series needs |z| < 1");
  double term = 1.0;
  double sum = 1.0;
  for (int k = 0; k < 100000; ++k) {
    const double kd = k;
    term *= (a1 + kd) * (a2 + kd) / ((b1 + kd) * (kd + 1.0)) * z;
    sum += term;
    if (std::abs(term) <= 1e-12 * std::abs(sum) * (1.0 - std::abs(z)) ||
        term == 0.0) {
      return sum;
    }
  }
  throw NumericalError("hyp2f1: series did not converge within 100000 terms");
}

/// Which asymptotic family applies: complex wavelets give complex Wishart
/// statistics, real wavelets real Wishart with half the degrees of freedom.
enum class Flavor { ComplexWavelet, RealWavelet };

inline std::string to_string(Flavor f) {
  return f == Flavor::ComplexWavelet ? "complex" : "real";
}

inline Flavor flavor_of(const Wavelet& psi) {
  return psi.is_complex() ? Flavor::ComplexWavelet : Flavor::RealWavelet;
}

/// Asymptotic distribution of the sample coherence for n degrees of freedom
/// and true coherence rho2.
class CoherenceDistribution {
 public:
  CoherenceDistribution(double n, double rho2, Flavor flavor)
      : n_(n), rho2_(rho2), flavor_(flavor) {
    if (!(n > 1.0)) throw ConfigError("coherence distribution needs n > 1");
    if (!(rho2 >= 0.0 && rho2 < 1.0)) throw ConfigError("rho2 must lie in [0, 1)");
    if (flavor_ == Flavor::RealWavelet) {
      log_const_ = std::lgamma(0.5 * n_) - std::lgamma(0.5) - std::lgamma(0.5 * (n_ - 1.0));
    }
  }

  double n() const noexcept { return n_; }
  double rho2() const noexcept { return rho2_; }
  Flavor flavor() const noexcept { return flavor_; }

  double density(double x) const {
    if (!(x >= 0.0 && x < 1.0)) throw ConfigError("coherence density: x outside [0, 1)");
    if (flavor_ == Flavor::ComplexWavelet) {
      return (n_ - 1.0) * std::pow(1.0 - rho2_, n_) * std::pow(1.0 - x, n_ - 2.0) *
             hyp2f1(n_, n_, 1.0, rho2_ * x);
    }
    if (x == 0.0) return std::numeric_limits<double>::infinity();
    const double h = 0.5 * n_;
    return std::exp(log_const_ - 0.5 * std::log(x) + (h - 1.5) * std::log1p(-x) +
                    h * std::log1p(-rho2_)) *
           hyp2f1(h, h, 0.5, rho2_ * x);
  }

  double cdf(double x) const {
    if (x <= 0.0) return 0.0;
    if (x >= 1.0) return 1.0;
    if (rho2_ == 0.0) {
      if (flavor_ == Flavor::ComplexWavelet) return -std::expm1((n_ - 1.0) * std::log1p(-x));
      return boost::math::ibeta(0.5, 0.5 * (n_ - 1.0), x);
    }
    return integrate(0.0, x);
  }

  /// ∫_lo^hi density, by tanh-sinh quadrature (handles the x^{-1/2} end).
  double integrate(double lo, double hi) const {
    static thread_local boost::math::quadrature::tanh_sinh<double> q;
    return q.integrate([this](double x) { return density(std::min(x, std::nextafter(1.0, 0.0))); },
                       lo, hi);
  }

 private:
  double n_;
  double rho2_;
  Flavor flavor_;
  double log_const_ = 0.0;
};

/// q-quantile of the null (rho2 = 0) coherence distribution.
inline double null_percentile(Flavor flavor, double n, double q) {
  if (!(q > 0.0 && q < 1.0)) throw ConfigError("percentile level must lie in (0, 1)");
  if (!(n > 1.0)) throw ConfigError("null percentile needs n > 1");
  if (flavor == Flavor::ComplexWavelet) return -std::expm1(std::log1p(-q) / (n - 1.0));
  double lo = 0.0;
  double hi = 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    (boost::math::ibeta(0.5, 0.5 * (n - 1.0), mid) < q ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

/// P(chi2_dof > x)
inline double chi2_sf(double x, double dof) {
  if (!(dof > 0.0)) throw ConfigError("chi2 degrees of freedom must be positive");
  if (x <= 0.0) return 1.0;
  return boost::math::gamma_q(0.5 * dof, 0.5 * x);
}

namespace detail {

// log det of a Hermitian positive definite matrix, or nullopt if singular.
inline std::optional<double> logdet_pd(const Eigen::MatrixXcd& m) {
  const Eigen::LLT<Eigen::MatrixXcd> llt(m);
  if (llt.info() != Eigen::Success) return std::nullopt;
  const double scale = m.diagonal().real().cwiseAbs().maxCoeff();
  double acc = 0.0;
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    const double d = llt.matrixL()(i, i).real();
    if (!(d > 1e-7 * std::sqrt(scale)) || !std::isfinite(d)) return std::nullopt;
    acc += 2.0 * std::log(d);
  }
  return acc;
}

}  // namespace detail

/// -2 log Λ for equality of K Wishart centrality matrices:
/// Λ = K^{pKn} Π det(B_i)^n / det(Σ B_i)^{Kn}; real flavor uses n/2.
inline double lrt_statistic(const std::vector<Eigen::MatrixXcd>& samples, double n,
                            Flavor flavor) {
  const std::size_t k = samples.size();
  if (k < 2) throw ConfigError("likelihood ratio test needs at least 2 segments");
  if (!(n > 0.0)) throw ConfigError("degrees of freedom must be positive");
  const auto p = samples.front().rows();
  const double m = flavor == Flavor::ComplexWavelet ? n : 0.5 * n;
  Eigen::MatrixXcd total = Eigen::MatrixXcd::Zero(p, p);
  double sum_logdet = 0.0;
  for (std::size_t i = 0; i < k; ++i) {
    if (samples[i].rows() != p || samples[i].cols() != p) {
      throw ConfigError("all segment matrices must be p x p");
    }
    const auto ld = detail::logdet_pd(samples[i]);
    if (!ld) throw DegenerateSegmentError(i + 1, "matrix is not positive definite");
    sum_logdet += *ld;
    total += samples[i];
  }
  const auto ld_total = detail::logdet_pd(total);
  if (!ld_total) throw DegenerateSegmentError(0, "pooled matrix is not positive definite");
  const double kd = static_cast<double>(k);
  const double log_lambda = static_cast<double>(p) * kd * m * std::log(kd) + m * sum_logdet -
                            kd * m * *ld_total;
  return std::max(0.0, -2.0 * log_lambda);
}

struct StationarityConfig {
  Wavelet wavelet = Wavelet::morlet();
  double kappa = 10.0;
  double c = 0.25;
  int J = 3;
  std::optional<Flavor> flavor;  // default: from the wavelet
  double energy_cutoff = kDefaultEnergyCutoff;
  std::size_t n_points = 0;      // 0: 512, or 16 per unit of support if larger
};

struct ScaleResult {
  int j = 0;
  std::size_t segments = 0;
  double a_tilde = 0.0;
  double a = 0.0;
  bool na = false;
  double statistic = std::numeric_limits<double>::quiet_NaN();
  double dof = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  std::string diagnostic;
};

struct StationarityReport {
  std::vector<ScaleResult> scales;
  double statistic = 0.0;
  double dof = 0.0;
  double p_value = std::numeric_limits<double>::quiet_NaN();
  double kappa = 0.0;
  double kappa_tilde = 0.0;
  double c = 0.0;
  double n = 0.0;
  double horizon = 0.0;
  std::size_t p = 0;
  Flavor flavor = Flavor::ComplexWavelet;
  std::string wavelet;
  std::string note;
};

/// Smoothing width kappa * T^c used by the test; enforces 0 < c < 1/2.
inline double test_kappa(double kappa, double c, double T) {
  if (!(c > 0.0 && c < 0.5)) throw ConfigError("c must satisfy 0 < c < 1/2");
  if (!(kappa > 0.0)) throw ConfigError("kappa must be positive");
  return kappa * std::pow(T, c);
}

/// Eigensystem of the test's kernel for horizon T (reusable across streams
/// sharing T).
inline EigenSystem stationarity_eigensystem(const StationarityConfig& cfg, double T) {
  const double kt = test_kappa(cfg.kappa, cfg.c, T);
  std::size_t points = cfg.n_points;
  if (points == 0) {
    points = std::max<std::size_t>(
        SmoothedKernel::kDefaultPoints,
        static_cast<std::size_t>(std::ceil(16.0 * (cfg.wavelet.alpha() + kt))));
  }
  return nystrom_decompose(cfg.wavelet, SmoothingWindow::rectangular(kt), points,
                           cfg.energy_cutoff);
}

/// Dyadic likelihood-ratio test of second-order stationarity.
inline StationarityReport stationarity_test(const EventStream& data, const EigenSystem& e,
                                            const StationarityConfig& cfg) {
  if (cfg.J < 1) throw ConfigError("J must be at least 1");
  const double T = data.horizon();
  const double kt = test_kappa(cfg.kappa, cfg.c, T);
  if (std::abs(e.kernel->kappa() - kt) > 1e-9 * kt) {
    throw ConfigError("eigensystem smoothing width does not match kappa * T^c");
  }
  StationarityReport rep;
  rep.kappa = cfg.kappa;
  rep.kappa_tilde = kt;
  rep.c = cfg.c;
  rep.n = degrees_of_freedom(e);
  rep.horizon = T;
  rep.p = data.dim();
  rep.flavor = cfg.flavor.value_or(flavor_of(e.kernel->wavelet()));
  rep.wavelet = e.kernel->wavelet().name();
  if (rep.wavelet == "morlet") {
    rep.note = "Morlet eigen-wavelets are only approximately orthogonal across dyadic "
               "cells; the combined statistic treats scales as independent.";
  }
  const double pd = static_cast<double>(data.dim());
  const double width = e.kernel->support_width();
  for (int j = 1; j <= cfg.J; ++j) {
    ScaleResult s;
    s.j = j;
    s.segments = std::size_t{1} << j;
    s.a_tilde = std::ldexp(1.0, -j);
    s.a = s.a_tilde * T / width;
    s.dof = (std::ldexp(1.0, j) - 1.0) * pd * pd;
    std::vector<Eigen::MatrixXcd> mats;
    for (std::size_t k = 1; k <= s.segments; ++k) {
      const double bt = (2.0 * static_cast<double>(k) - 1.0) / std::ldexp(1.0, j + 1);
      mats.push_back(smoothed_periodogram_eigen(data, e, s.a, bt * T));
    }
    try {
      s.statistic = lrt_statistic(mats, rep.n, rep.flavor);
      s.p_value = chi2_sf(s.statistic, s.dof);
      rep.statistic += s.statistic;
      rep.dof += s.dof;
    } catch (const DegenerateSegmentError& err) {
      s.na = true;
      s.diagnostic = err.what();
    }
    rep.scales.push_back(s);
  }
  if (rep.dof > 0.0) rep.p_value = chi2_sf(rep.statistic, rep.dof);
  return rep;
}

inline StationarityReport stationarity_test(const EventStream& data,
                                            const StationarityConfig& cfg) {
  if (cfg.J < 1) throw ConfigError("J must be at least 1");
  return stationarity_test(data, stationarity_eigensystem(cfg, data.horizon()), cfg);
}

inline nlohmann::json to_json(const StationarityReport& r) {
  auto num = [](double v) -> nlohmann::json {
    return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr);
  };
  nlohmann::json scales = nlohmann::json::array();
  for (const auto& s : r.scales) {
    scales.push_back({{"j", s.j},
                      {"segments", s.segments},
                      {"a_tilde", s.a_tilde},
                      {"a", s.a},
                      {"statistic", num(s.statistic)},
                      {"dof", s.dof},
                      {"p_value", num(s.p_value)},
                      {"na", s.na},
                      {"diagnostic", s.diagnostic}});
  }
  return {{"scales", scales},
          {"combined",
           {{"statistic", r.statistic}, {"dof", r.dof}, {"p_value", num(r.p_value)}}},
          {"meta",
           {{"wavelet", r.wavelet},
            {"flavor", to_string(r.flavor)},
            {"kappa", r.kappa},
            {"kappa_tilde", r.kappa_tilde},
            {"c", r.c},
            {"n", r.n},
            {"T", r.horizon},
            {"p", r.p},
            {"note", r.note}}}};
}

}  // namespace pwav
