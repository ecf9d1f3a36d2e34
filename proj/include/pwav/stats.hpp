#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "pwav/special.hpp"

namespace pwav::stats {

inline double mean(const std::vector<double>& x) {
  return std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(x.size());
}

/// Unbiased sample variance.
inline double variance(const std::vector<double>& x) {
  const double m = mean(x);
  double acc = 0.0;
  for (double v : x) acc += (v - m) * (v - m);
  return acc / static_cast<double>(x.size() - 1);
}

inline double standard_error(const std::vector<double>& x) {
  return std::sqrt(variance(x) / static_cast<double>(x.size()));
}

inline double correlation(const std::vector<double>& x, const std::vector<double>& y) {
  const double mx = mean(x);
  const double my = mean(y);
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    sxy += (x[k] - mx) * (y[k] - my);
    sxx += (x[k] - mx) * (x[k] - mx);
    syy += (y[k] - my) * (y[k] - my);
  }
  return sxy / std::sqrt(sxx * syy);
}

/// Correlation between sorted sample and standard-normal quantiles at
/// plotting positions (k - 1/2)/m.
inline double qq_correlation_normal(std::vector<double> x) {
  std::sort(x.begin(), x.end());
  const auto m = x.size();
  std::vector<double> q(m);
  for (std::size_t k = 0; k < m; ++k) {
    q[k] = special::normal_quantile((static_cast<double>(k) + 0.5) / static_cast<double>(m));
  }
  return correlation(x, q);
}

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
};

/// One-sample Kolmogorov–Smirnov test against a continuous cdf; p-value from
/// the asymptotic distribution with Stephens' finite-sample correction.
template <typename Cdf>
KsResult ks_test(std::vector<double> x, Cdf&& cdf) {
  std::sort(x.begin(), x.end());
  const double m = static_cast<double>(x.size());
  double d = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    const double f = cdf(x[k]);
    d = std::max({d, f - static_cast<double>(k) / m, static_cast<double>(k + 1) / m - f});
  }
  const double sm = std::sqrt(m);
  return {d, special::kolmogorov_sf((sm + 0.12 + 0.11 / sm) * d)};
}

}  // namespace pwav::stats
