#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include <boost/math/special_functions/beta.hpp>

#include "pwav/inference.hpp"

using namespace pwav;

TEST(Hyp2f1, Identities) {
  EXPECT_EQ(hyp2f1(3.0, 4.0, 2.0, 0.0), 1.0);
  EXPECT_NEAR(hyp2f1(1.0, 1.0, 1.0, 0.5), 2.0, 1e-12);
  EXPECT_THROW(hyp2f1(1.0, 1.0, 1.0, 1.0), ConfigError);
  EXPECT_THROW(hyp2f1(1.0, 1.0, 0.0, 0.1), ConfigError);
}

TEST(Hyp2f1, HighPrecisionReference) {
  // 30-digit reference values
  EXPECT_NEAR(hyp2f1(4.33, 4.33, 1.0, 0.3), 88.5243816548354403604764677511, 1e-10 * 88.5);
  EXPECT_NEAR(hyp2f1(5.0, 5.0, 0.5, 0.2), 140.385665857820560554596374223, 1e-10 * 140.4);
}

TEST(Hyp2f1, MatchesLongDirectSummation) {
  // 2000-term summation in long double
  const long double n = 4.33L, z = 0.3L;
  long double term = 1.0L, sum = 1.0L;
  for (int k = 0; k < 2000; ++k) {
    term *= (n + k) * (n + k) / ((1.0L + k) * (k + 1.0L)) * z;
    sum += term;
  }
  EXPECT_NEAR(hyp2f1(4.33, 4.33, 1.0, 0.3), static_cast<double>(sum), 1e-10 * static_cast<double>(sum));
}

TEST(CoherenceDensity, NullComplexIsBeta) {
  const CoherenceDistribution d(8.31, 0.0, Flavor::ComplexWavelet);
  for (double x : {0.0, 0.1, 0.5, 0.9}) {
    EXPECT_NEAR(d.density(x), 7.31 * std::pow(1.0 - x, 6.31), 1e-12);
  }
}

TEST(CoherenceDensity, NullRealIsBeta) {
  const CoherenceDistribution d(10.0, 0.0, Flavor::RealWavelet);
  const double b = boost::math::beta(0.5, 4.5);
  for (double x : {0.01, 0.2, 0.6}) {
    EXPECT_NEAR(d.density(x), std::pow(x, -0.5) * std::pow(1.0 - x, 3.5) / b, 1e-12);
  }
}

TEST(CoherenceDensity, DomainChecked) {
  const CoherenceDistribution d(8.0, 0.4, Flavor::ComplexWavelet);
  EXPECT_THROW(d.density(1.0), ConfigError);
  EXPECT_THROW(d.density(-0.1), ConfigError);
  EXPECT_THROW(CoherenceDistribution(1.0, 0.0, Flavor::ComplexWavelet), ConfigError);
  EXPECT_THROW(CoherenceDistribution(5.0, 1.0, Flavor::ComplexWavelet), ConfigError);
}

TEST(CoherenceDensity, IntegratesToOne) {
  for (Flavor f : {Flavor::ComplexWavelet, Flavor::RealWavelet}) {
    for (double n : {4.0, 8.31, 10.0, 11.57}) {
      for (double rho2 : {0.0, 0.4, 0.8}) {
        const CoherenceDistribution d(n, rho2, f);
        EXPECT_NEAR(d.integrate(0.0, 1.0), 1.0, 1e-6) << to_string(f) << " n=" << n << " rho2=" << rho2;
      }
    }
  }
}

TEST(CoherenceDensity, AlternativeMeanExceedsNull) {
  const CoherenceDistribution null(8.31, 0.0, Flavor::ComplexWavelet);
  const CoherenceDistribution alt(8.31, 0.4, Flavor::ComplexWavelet);
  EXPECT_GT(alt.density(0.3), 0.0);
  EXPECT_LT(alt.cdf(0.3), null.cdf(0.3));
}

TEST(NullPercentile, Complex) {
  EXPECT_NEAR(null_percentile(Flavor::ComplexWavelet, 2.0, 0.95), 0.95, 1e-14);
  for (double n : {3.0, 4.335, 8.31}) {
    for (double q : {0.5, 0.95, 0.99}) {
      const double x = null_percentile(Flavor::ComplexWavelet, n, q);
      EXPECT_NEAR(CoherenceDistribution(n, 0.0, Flavor::ComplexWavelet).cdf(x), q, 1e-12);
    }
  }
}

TEST(NullPercentile, MorletKappaTen) {
  const auto e = nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 512, 1.0 - 1e-6);
  EXPECT_NEAR(null_percentile(Flavor::ComplexWavelet, degrees_of_freedom(e), 0.95), 0.593, 0.01);
}

TEST(NullPercentile, RealMedianByQuadrature) {
  const double x = null_percentile(Flavor::RealWavelet, 10.0, 0.5);
  EXPECT_NEAR(x, 0.0520147314727185640602784921022, 1e-8);
  const CoherenceDistribution d(10.0, 0.0, Flavor::RealWavelet);
  EXPECT_NEAR(d.integrate(0.0, x), 0.5, 1e-8);
}

TEST(Chi2, SurvivalFunction) {
  EXPECT_EQ(chi2_sf(0.0, 3.0), 1.0);
  EXPECT_NEAR(chi2_sf(2.0 * std::log(20.0), 2.0), 0.05, 1e-10);
  EXPECT_NEAR(chi2_sf(7.8147, 3.0), 0.05, 1e-4);
  EXPECT_THROW(chi2_sf(1.0, 0.0), ConfigError);
}

namespace {
Eigen::MatrixXcd scalar(double v) { return Eigen::MatrixXcd::Constant(1, 1, v); }
}  // namespace

TEST(Lrt, IdenticalMatricesGiveZero) {
  Eigen::MatrixXcd b(2, 2);
  b << 2.0, cplx(0.3, 0.1), cplx(0.3, -0.1), 1.0;
  EXPECT_NEAR(lrt_statistic({b, b, b, b}, 8.31, Flavor::ComplexWavelet), 0.0, 1e-10);
}

TEST(Lrt, ScalarHandExpansion) {
  const double n = 6.0, b1 = 1.3, b2 = 2.9;
  const double expect = -2.0 * n * (2.0 * std::log(2.0) + std::log(b1) + std::log(b2) - 2.0 * std::log(b1 + b2));
  EXPECT_NEAR(lrt_statistic({scalar(b1), scalar(b2)}, n, Flavor::ComplexWavelet), expect, 1e-12);
  EXPECT_NEAR(lrt_statistic({scalar(b1), scalar(b2)}, n, Flavor::RealWavelet), 0.5 * expect, 1e-12);
}

TEST(Lrt, ScaleInvariantAndNonNegative) {
  Eigen::MatrixXcd a(2, 2), b(2, 2);
  a << 2.0, 0.5, 0.5, 1.0;
  b << 1.0, cplx(0.2, 0.4), cplx(0.2, -0.4), 3.0;
  const double s = lrt_statistic({a, b}, 5.0, Flavor::ComplexWavelet);
  EXPECT_GT(s, 0.0);
  EXPECT_NEAR(lrt_statistic({7.0 * a, 7.0 * b}, 5.0, Flavor::ComplexWavelet), s, 1e-10);
}

TEST(Lrt, SingularSegmentNamed) {
  Eigen::MatrixXcd good(2, 2), bad(2, 2);
  good << 2.0, 0.5, 0.5, 1.0;
  bad << 1.0, 1.0, 1.0, 1.0;
  try {
    lrt_statistic({good, good, bad}, 5.0, Flavor::ComplexWavelet);
    FAIL();
  } catch (const DegenerateSegmentError& e) {
    EXPECT_EQ(e.segment(), 3u);
  }
  EXPECT_THROW(lrt_statistic({good}, 5.0, Flavor::ComplexWavelet), ConfigError);
}

TEST(StationarityTest, ConfigValidation) {
  const auto n = simulate_poisson({2.0, 2.0}, 200.0, 1);
  StationarityConfig cfg;
  cfg.J = 0;
  EXPECT_THROW(stationarity_test(n, cfg), ConfigError);
  cfg.J = 2;
  cfg.c = 0.5;
  EXPECT_THROW(stationarity_test(n, cfg), ConfigError);
  cfg.c = 0.0;
  EXPECT_THROW(stationarity_test(n, cfg), ConfigError);
}

TEST(StationarityTest, PoissonReport) {
  const auto n = simulate_poisson({2.0, 2.0}, 1500.0, 77);
  StationarityConfig cfg;
  cfg.J = 3;
  const auto rep = stationarity_test(n, cfg);
  ASSERT_EQ(rep.scales.size(), 3u);
  double sum = 0.0, dof = 0.0;
  for (const auto& s : rep.scales) {
    EXPECT_FALSE(s.na);
    EXPECT_DOUBLE_EQ(s.dof, (std::ldexp(1.0, s.j) - 1.0) * 4.0);
    EXPECT_GT(s.p_value, 0.0);
    EXPECT_LT(s.p_value, 1.0);
    sum += s.statistic;
    dof += s.dof;
  }
  EXPECT_DOUBLE_EQ(rep.statistic, sum);
  EXPECT_DOUBLE_EQ(rep.dof, dof);
  EXPECT_DOUBLE_EQ(rep.dof, 4.0 * (std::ldexp(1.0, 4) - 2.0 - 3.0));
  EXPECT_NEAR(rep.kappa_tilde, 10.0 * std::pow(1500.0, 0.25), 1e-9);
  const auto j = to_json(rep);
  EXPECT_EQ(j["scales"].size(), 3u);
  EXPECT_TRUE(j["combined"].contains("p_value"));
  EXPECT_EQ(j["meta"]["flavor"], "complex");
}

TEST(StationarityTest, SingleSplitDof) {
  const auto n = simulate_poisson({3.0, 3.0}, 400.0, 5);
  StationarityConfig cfg;
  cfg.J = 1;
  const auto rep = stationarity_test(n, cfg);
  EXPECT_DOUBLE_EQ(rep.scales[0].dof, 4.0);
  EXPECT_DOUBLE_EQ(rep.dof, 4.0);
}

TEST(StationarityTest, EmptyComponentGivesNa) {
  const auto poisson = simulate_poisson({2.0}, 300.0, 3);
  const EventStream n(300.0, {poisson.events(0), {}});
  StationarityConfig cfg;
  cfg.J = 2;
  const auto rep = stationarity_test(n, cfg);
  for (const auto& s : rep.scales) {
    EXPECT_TRUE(s.na);
    EXPECT_FALSE(s.diagnostic.empty());
  }
  EXPECT_EQ(rep.dof, 0.0);
  EXPECT_TRUE(std::isnan(rep.p_value));
}

TEST(StationarityTest, RealWaveletFlavor) {
  const auto n = simulate_poisson({2.0, 2.0}, 600.0, 9);
  StationarityConfig cfg;
  cfg.wavelet = Wavelet::mexican_hat();
  cfg.J = 2;
  const auto rep = stationarity_test(n, cfg);
  EXPECT_EQ(rep.flavor, Flavor::RealWavelet);
  EXPECT_TRUE(rep.note.empty());
}
