#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "pwav/kernel.hpp"
#include "pwav/random.hpp"

using namespace pwav;

class KernelKappa : public ::testing::TestWithParam<double> {};

TEST_P(KernelKappa, AnalyticMatchesQuadratureOnGrid) {
  const double kappa = GetParam();
  const Wavelet psi = Wavelet::morlet();
  const auto h = SmoothingWindow::rectangular(kappa);
  const double width = psi.alpha() + kappa;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    for (int j = 0; j < 50; ++j) {
      const double s = -0.5 * width + (i + 0.5) * width / 50.0;
      const double t = -0.5 * width + (j + 0.5) * width / 50.0;
      worst = std::max(worst, std::abs(morlet_rect_kernel(psi, kappa, s, t) - kernel_value(psi, h, s, t)));
    }
  }
  EXPECT_LE(worst, 1e-8);
}

INSTANTIATE_TEST_SUITE_P(Widths, KernelKappa, ::testing::Values(5.0, 10.0, 20.0));

TEST(Kernel, IdealClosedFormAtOrigin) {
  EXPECT_NEAR(morlet_rect_kernel_ideal(10.0, 0.0, 0.0).real(), 0.1, 1e-12);
  EXPECT_EQ(morlet_rect_kernel_ideal(10.0, 0.0, 0.0).imag(), 0.0);
}

TEST(Kernel, IdealClosedFormOffDiagonal) {
  // (s,t) = (1,0): modulus (2κ)^{-1} e^{-1/4} [erf(9/2) + erf(11/2)], phase e^{i2π}
  const double kappa = 10.0;
  const cplx k = morlet_rect_kernel_ideal(kappa, 1.0, 0.0);
  const double mod = std::exp(-0.25) * (std::erf(4.5) + std::erf(5.5)) / (2.0 * kappa);
  EXPECT_NEAR(std::abs(k), mod, 1e-14);
  EXPECT_NEAR(k.imag(), 0.0, 1e-14);
}

TEST(Kernel, IdealFormMatchesUntruncatedQuadrature) {
  // independent dense quadrature of the defining integral with the raw Morlet
  const double kappa = 10.0;
  const Wavelet psi = Wavelet::morlet();
  for (auto [s, t] : {std::pair{1.0, 0.0}, std::pair{-2.3, 0.4}, std::pair{3.0, 3.5}}) {
    const cplx q = simpson([&](double u) { return psi.raw(s - u) * std::conj(psi.raw(t - u)) / kappa; },
                           -0.5 * kappa, 0.5 * kappa, 20000);
    EXPECT_LT(std::abs(q - morlet_rect_kernel_ideal(kappa, s, t)), 1e-10);
  }
}

TEST(Kernel, DiagonalRealPositive) {
  const Wavelet psi = Wavelet::morlet();
  for (double s : {-6.0, 0.0, 2.5}) {
    const cplx k = morlet_rect_kernel(psi, 10.0, s, s);
    EXPECT_GT(k.real(), 0.0);
    EXPECT_LT(std::abs(k.imag()), 1e-15);
  }
}

TEST(Kernel, ZeroOutsideSupport) {
  const auto k = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 64);
  EXPECT_EQ(k(9.01, 0.0), cplx(0.0, 0.0));
  EXPECT_EQ(k(0.0, -9.5), cplx(0.0, 0.0));
  EXPECT_EQ(kernel_value(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 9.2, 1.0), cplx(0.0, 0.0));
}

TEST(Kernel, HermitianAtRandomPoints) {
  Rng rng(3);
  for (const Wavelet& psi : {Wavelet::morlet(), Wavelet::mexican_hat()}) {
    const auto h = SmoothingWindow::rectangular(7.0);
    for (int r = 0; r < 25; ++r) {
      const double s = -8.0 + 16.0 * rng.uniform();
      const double t = -8.0 + 16.0 * rng.uniform();
      EXPECT_LT(std::abs(kernel_value(psi, h, s, t) - std::conj(kernel_value(psi, h, t, s))), 1e-15);
    }
  }
}

TEST(Kernel, ScaledKernel) {
  const auto k = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 64);
  EXPECT_EQ(scaled_kernel_value(k, 1.0, 0.0, 0.7, -1.1), k(0.7, -1.1));
  EXPECT_NEAR(std::abs(scaled_kernel_value(k, 2.0, 0.0, 0.0, 0.0) - 0.5 * k(0.0, 0.0)), 0.0, 1e-15);
  EXPECT_THROW(scaled_kernel_value(k, 0.0, 0.0, 0.0, 0.0), ConfigError);
}

TEST(Kernel, ScaledTraceIsOne) {
  const auto k = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 64);
  const double a = 3.0, b = 5.0;
  const double half = 0.5 * a * k.support_width();
  const double tr = simpson([&](double t) { return scaled_kernel_value(k, a, b, t, t).real(); },
                            b - half, b + half, 4000);
  EXPECT_NEAR(tr, 1.0, 1e-4);
}

TEST(Kernel, TraceRuleForAllPairs) {
  for (const Wavelet& psi : {Wavelet::morlet(), Wavelet::mexican_hat()}) {
    for (double kappa : {5.0, 20.0}) {
      const auto k = SmoothedKernel::build(psi, SmoothingWindow::rectangular(kappa), 256);
      EXPECT_NEAR(k.values().diagonal().real().sum() * k.weight(), 1.0, 1e-4) << psi.name();
    }
  }
}

TEST(Kernel, SampledMatrixNonNegativeDefinite) {
  for (double kappa : {5.0, 10.0, 20.0}) {
    const auto k = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(kappa), 256);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(k.weight() * k.values(), Eigen::EigenvaluesOnly);
    EXPECT_GE(es.eigenvalues().minCoeff(), -1e-8 * es.eigenvalues().maxCoeff());
  }
}

TEST(Kernel, TabulatedFlatWindowEqualsRectangular) {
  const Wavelet psi = Wavelet::mexican_hat();
  const auto rect = SmoothingWindow::rectangular(6.0);
  const auto tab = SmoothingWindow::tabulated(std::vector<double>(101, 3.0), 6.0);
  EXPECT_NEAR(tab(0.0), rect(0.0), 1e-12);
  EXPECT_NEAR(std::abs(kernel_value(psi, tab, 0.4, -1.0) - kernel_value(psi, rect, 0.4, -1.0)), 0.0, 1e-12);
}

TEST(Kernel, DiracWindowIsOuterProduct) {
  const Wavelet psi = Wavelet::morlet();
  const cplx k = kernel_value(psi, SmoothingWindow::dirac(), 0.3, -0.2);
  EXPECT_LT(std::abs(k - psi(0.3) * std::conj(psi(-0.2))), 1e-15);
}

TEST(Kernel, AnalyticOnlyForMorletRectangular) {
  EXPECT_THROW(SmoothedKernel::build(Wavelet::mexican_hat(), SmoothingWindow::rectangular(5.0), 64,
                                     KernelMethod::Analytic),
               ConfigError);
  const auto q = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(5.0), 64,
                                       KernelMethod::Quadrature);
  const auto a = SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(5.0), 64);
  EXPECT_TRUE(a.analytic());
  EXPECT_FALSE(q.analytic());
  EXPECT_LT((q.values() - a.values()).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(ValidRegion, Apex) {
  const double T = 100.0, alpha = 8.0, kappa = 20.0;
  const auto r = valid_region(alpha, kappa, T);
  EXPECT_DOUBLE_EQ(r.a_max(), T / (alpha + kappa));
  EXPECT_TRUE(r.contains(r.a_max(), T / 2));
  EXPECT_FALSE(r.contains(r.a_max() + 1e-6, T / 2));
  EXPECT_FALSE(r.contains(0.0, T / 2));
}

TEST(ValidRegion, InteriorPoint) {
  const double T = 100.0, alpha = 8.0, kappa = 20.0;
  const auto r = valid_region(alpha, kappa, T);
  const double a = r.a_max() / 2;
  const double b = T / 4 + a * (alpha + kappa) / 4;
  const bool expect = b - a * (alpha + kappa) / 2 >= 0 && b + a * (alpha + kappa) / 2 <= T;
  EXPECT_EQ(r.contains(a, b), expect);
  EXPECT_FALSE(r.contains(a, 1.0));
}
