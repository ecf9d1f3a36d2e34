#include <gtest/gtest.h>

#include <cmath>
#include <memory>
#include <numbers>

#include "pwav/eigensys.hpp"

using namespace pwav;

namespace {

const EigenSystem& morlet10() {
  static const EigenSystem e =
      nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 512, 0.999);
  return e;
}

const EigenSystem& morlet10_fine() {
  static const EigenSystem e =
      nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 512, 1.0 - 1e-8);
  return e;
}

}  // namespace

TEST(Nystrom, NineTermsCarryEnergy) {
  const auto& e = morlet10();
  EXPECT_EQ(e.rank(), 9u);
  EXPECT_GE(e.retained_energy(), 0.999);
}

TEST(Nystrom, TraceRule) {
  EXPECT_NEAR(morlet10().total, 1.0, 1e-6);
}

TEST(Nystrom, EigenvaluesDescendingNonNegative) {
  const auto& ev = morlet10_fine().eigenvalues;
  for (Eigen::Index l = 1; l < ev.size(); ++l) EXPECT_LE(ev(l), ev(l - 1));
  EXPECT_GE(ev.minCoeff(), 0.0);
}

TEST(Nystrom, WeightedOrthonormal) {
  const auto& e = morlet10_fine();
  const Eigen::MatrixXcd gram = e.weight() * e.vectors.adjoint() * e.vectors;
  const auto r = static_cast<Eigen::Index>(e.rank());
  EXPECT_LE((gram - Eigen::MatrixXcd::Identity(r, r)).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(Nystrom, EigenWaveletsAreWavelets) {
  const auto& e = morlet10();
  for (Eigen::Index l = 0; l < e.vectors.cols(); ++l) {
    EXPECT_LE(std::abs(e.vectors.col(l).sum() * e.weight()), 1e-5) << l;
    EXPECT_NEAR(e.vectors.col(l).squaredNorm() * e.weight(), 1.0, 1e-6);
  }
}

TEST(Nystrom, RankOneKernel) {
  const auto e = nystrom_decompose(Wavelet::morlet(), SmoothingWindow::dirac(), 512, 1.0 - 1e-12);
  EXPECT_NEAR(e.eigenvalues(0) / e.total, 1.0, 1e-8);
  for (Eigen::Index l = 1; l < e.eigenvalues.size(); ++l) EXPECT_LE(e.eigenvalues(l), 1e-8);
  EXPECT_NEAR(degrees_of_freedom(e), 1.0, 1e-8);
}

TEST(Nystrom, GridRefinementStable) {
  const auto fine = nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 1024, 0.999);
  const auto& e = morlet10();
  for (Eigen::Index l = 0; l < e.eigenvalues.size(); ++l) {
    EXPECT_LE(std::abs(fine.eigenvalues(l) - e.eigenvalues(l)), 1e-6) << l;
  }
}

TEST(Nystrom, RejectsTinyGrid) {
  const auto k = std::make_shared<const SmoothedKernel>(
      SmoothedKernel::build(Wavelet::morlet(), SmoothingWindow::rectangular(10.0), 32));
  EXPECT_THROW(nystrom_decompose(k, 0.999), ConfigError);
}

TEST(Nystrom, MercerReconstruction) {
  const auto& e = morlet10_fine();
  const Eigen::MatrixXcd rec =
      e.vectors * e.eigenvalues.cast<cplx>().asDiagonal() * e.vectors.adjoint();
  EXPECT_LE((rec - e.kernel->values()).cwiseAbs().maxCoeff(), 1e-3);
}

TEST(Dof, MorletAndMexicanHat) {
  const auto m = nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(20.0), 512, 1.0 - 1e-8);
  const auto x = nystrom_decompose(Wavelet::mexican_hat(), SmoothingWindow::rectangular(20.0), 512, 1.0 - 1e-8);
  EXPECT_NEAR(degrees_of_freedom(m), 8.31, 0.05);
  EXPECT_NEAR(degrees_of_freedom(x), 11.57, 0.05);
  // eigen-sum vs the exact rectangular-window identity
  EXPECT_NEAR(degrees_of_freedom(m), dof_rectangular_exact(Wavelet::morlet(), 20.0), 1e-3);
  EXPECT_NEAR(degrees_of_freedom(x), dof_rectangular_exact(Wavelet::mexican_hat(), 20.0), 1e-3);
}

TEST(Dof, ClosedFormGaussianOracle) {
  // untruncated Morlet: ∫|P|² = ∫ e^{-x²/2} dx = √(2π)
  const double kappa = 20.0;
  EXPECT_NEAR(dof_closed_form(Wavelet::morlet(), kappa), kappa / std::sqrt(2.0 * std::numbers::pi), 1e-3);
}

TEST(Dof, ClosedFormLinearInKappa) {
  const Wavelet w = Wavelet::morlet();
  EXPECT_NEAR(dof_closed_form(w, 16.0), 2.0 * dof_closed_form(w, 8.0 + 1e-9), 1e-6);
  EXPECT_THROW(dof_closed_form(w, 8.0), ConfigError);
  EXPECT_THROW(dof_closed_form(w, 3.0), ConfigError);
}

TEST(Dof, MonotoneInKappa) {
  double prev = 0.0;
  for (double kappa : {5.0, 10.0, 20.0, 40.0}) {
    const double n = degrees_of_freedom(
        nystrom_decompose(Wavelet::morlet(), SmoothingWindow::rectangular(kappa), 512, 1.0 - 1e-8));
    EXPECT_GE(n, prev);
    prev = n;
  }
}

TEST(EigenWavelet, ExtensionReproducesGridSamples) {
  const auto& e = morlet10();
  for (Eigen::Index j = 0; j < 512; j += 41) {
    for (std::size_t l = 0; l < e.rank(); ++l) {
      EXPECT_LT(std::abs(eigen_wavelet_value(e, l, e.grid()(j)) - e.vectors(j, static_cast<Eigen::Index>(l))), 1e-8);
    }
  }
}

TEST(EigenWavelet, InterpolationMatchesExtension) {
  const auto& e = morlet10();
  for (double x = -8.7; x < 8.7; x += 0.313) {
    for (std::size_t l = 0; l < e.rank(); ++l) {
      EXPECT_LT(std::abs(eigen_wavelet_interpolated(e, l, x) - eigen_wavelet_value(e, l, x)), 1e-5);
    }
  }
  EXPECT_EQ(eigen_wavelet_interpolated(e, 0, 9.5), cplx(0.0, 0.0));
}

TEST(EigenWavelet, MorletPhaseFactorisation) {
  // exact only without the mean correction; the leak scales with the offset
  // and grows as eta shrinks, so check the terms holding 0.999 of the energy
  const auto& e = morlet10();
  const double offset = std::abs(Wavelet::morlet().mean_offset());
  double cum = 0.0;
  for (Eigen::Index l = 0; l < e.envelopes.cols() && cum < 0.999; ++l) {
    cum += e.eigenvalues(l) / e.total;
    EXPECT_LE(e.envelopes.col(l).imag().cwiseAbs().maxCoeff(), 5.0 * offset) << l;
  }
}

TEST(EigenWavelet, Orthogonal) {
  const auto& e = morlet10();
  EXPECT_LT(std::abs(e.vectors.col(0).dot(e.vectors.col(1)) * e.weight()), 1e-8);
}

TEST(EigenWavelet, IndexChecked) {
  EXPECT_THROW(eigen_wavelet_value(morlet10(), 9, 0.0), ConfigError);
  EXPECT_THROW(eigen_wavelet_interpolated(morlet10(), 100, 0.0), ConfigError);
}

TEST(FrequencyResponse, MatchesWaveletSpectrum) {
  const auto& e = morlet10();
  const Wavelet psi = Wavelet::morlet();
  const double peak = std::norm(fourier_transform(psi, 1.0));
  EXPECT_NEAR(effective_frequency_response(e, 1.0), peak, 0.02 * peak);
  EXPECT_LE(effective_frequency_response(e, 5.0), 1e-4);
  // relative to the sup norm of |Psi|^2; pointwise 2% inside the passband
  double worst = 0.0;
  for (int k = 0; k < 200; ++k) {
    const double f = -1.0 + 4.0 * k / 199.0;
    const double ref = std::norm(fourier_transform(psi, f));
    const double got = effective_frequency_response(e, f);
    worst = std::max(worst, std::abs(got - ref));
    if (ref >= 0.05 * peak) {
      EXPECT_NEAR(got, ref, 0.02 * ref) << "f=" << f;
    }
  }
  EXPECT_LE(worst, 0.02 * peak);
}

TEST(FrequencyResponse, Parseval) {
  const auto& e = morlet10();
  const double total = simpson([&](double f) { return effective_frequency_response(e, f); }, -1.0, 3.0, 400);
  EXPECT_NEAR(total, 1.0, 0.01);
}
