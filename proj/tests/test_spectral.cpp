#include <gtest/gtest.h>

#include <random>

#include "dhs/errors.hpp"
#include "dhs/spectral.hpp"
#include "support.hpp"

namespace dhs {
namespace {

TEST(Eigendecompose, OrthonormalEigenpairs) {
  for (const auto& w : {Window::symmetric(10), Window::cells(12)}) {
    std::mt19937_64 rng(3);
    const PeriodicCoefficients c(test::random_coefficients(2, 3, rng).matrices);
    const auto op = assemble(w, c);
    const auto dec = eigendecompose(op);
    const Eigen::MatrixXd& V = dec.eigenvectors;
    EXPECT_LE((V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff(), 1e-12);
    EXPECT_LE((op.dense() * V - V * dec.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-11);
    for (Eigen::Index i = 1; i < dec.size(); ++i) EXPECT_LE(dec.eigenvalues[i - 1], dec.eigenvalues[i]);
    EXPECT_GT(dec.eigenvalues[dec.split_index], 0.0);
    EXPECT_LE(dec.eigenvalues[dec.split_index - 1], 0.0);
  }
}

TEST(Eigendecompose, BandedMatchesDense) {
  const auto c = test::model_coeffs();
  const Window w = Window::symmetric(300);
  const auto op = assemble(w, c, Storage::Banded);
  const auto banded = eigendecompose(op);
  const auto dense = eigendecompose(assemble(w, c, Storage::Dense));
  EXPECT_LE((banded.eigenvalues - dense.eigenvalues).cwiseAbs().maxCoeff(), 1e-11);
  const Eigen::MatrixXd& V = banded.eigenvectors;
  EXPECT_LE((op.dense() * V - V * banded.eigenvalues.asDiagonal()).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_LE((V.transpose() * V - Eigen::MatrixXd::Identity(V.cols(), V.cols())).cwiseAbs().maxCoeff(), 1e-11);
  EXPECT_EQ(banded.split_index, dense.split_index);
  // Individual vectors of near-degenerate pairs may differ; E- may not.
  std::mt19937_64 rng(8);
  const auto x = test::random_vector(w, 1, rng);
  EXPECT_LE(linf_norm(projectors(banded, x).minus - projectors(dense, x).minus), 1e-10);
}

TEST(Projectors, ParsevalAndSplitting) {
  std::mt19937_64 rng(11);
  const auto op = assemble(Window::symmetric(15), PeriodicCoefficients(test::random_coefficients(1, 2, rng).matrices));
  const auto dec = eigendecompose(op);
  for (int trial = 0; trial < 10; ++trial) {
    const auto x = test::random_vector(dec.window, 1, rng);
    EXPECT_NEAR(dec.coordinates(x).squaredNorm(), l2_inner(x, x), 1e-11);
    const auto s = projectors(dec, x);
    EXPECT_LE(linf_norm(s.minus + s.plus - x), 1e-12);
    EXPECT_NEAR(l2_inner(s.minus, s.plus), 0.0, 1e-11);
    EXPECT_LT(l2_inner(op.apply(s.minus), s.minus), 0.0);
    EXPECT_GT(l2_inner(op.apply(s.plus), s.plus), 0.0);
    const double e2 = l2_inner(op.apply(s.plus), s.plus) - l2_inner(op.apply(s.minus), s.minus);
    EXPECT_NEAR(e_norm(dec, x) * e_norm(dec, x), e2, 1e-10 * e2);
    const auto again = projectors(dec, s.plus);
    EXPECT_LE(linf_norm(again.minus), 1e-12);
  }
  EXPECT_THROW(projectors(dec, test::random_vector(Window::symmetric(14), 1, rng)), DimensionError);
}

TEST(Projectors, ZeroEigenvalueHasNoSplit) {
  SpectralDecomposition dec{Window::symmetric(0), 1, Eigen::Vector2d(0.0, 1.0),
                            Eigen::MatrixXd::Identity(2, 2), 1, 0.0, 1.0};
  BlockVector x(dec.window, 1);
  x.block(0)[0] = 1.0;
  EXPECT_THROW(projectors(dec, x), SpectralGapError);
}

// On a periodic window the spectrum of A+S is a sample of the bands, so it lies
// in [-L0-2, -l0] u [l0, L0+2] and the E-norm is equivalent to the l2 norm with
// sqrt(l0) and sqrt(2+L0).
TEST(Inclusion, PeriodicWindowsRespectTheBounds) {
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    std::mt19937_64 rng(seed);
    const int N = 1 + static_cast<int>(seed % 3);
    const int T = 1 + static_cast<int>(seed % 2);
    const auto rc = test::random_coefficients(N, T, rng);
    const PeriodicCoefficients c(rc.matrices);
    const auto dec = eigendecompose(assemble(Window::cells(10 * T), c));
    const std::vector<double> ev(dec.eigenvalues.data(), dec.eigenvalues.data() + dec.size());
    const auto inc = spectral_inclusion(ev, rc.lambda0, rc.Lambda0, 1e-10);
    EXPECT_TRUE(inc.passed) << inc.worst_violation;
    EXPECT_TRUE(gap_mode_report(dec).empty());
    for (int trial = 0; trial < 5; ++trial) {
      const auto x = test::random_vector(dec.window, N, rng);
      const double e = e_norm(dec, x);
      EXPECT_GE(e, std::sqrt(rc.lambda0) * l2_norm(x) * (1 - 1e-12));
      EXPECT_LE(e, std::sqrt(2 + rc.Lambda0) * l2_norm(x) * (1 + 1e-12));
    }
  }
}

TEST(Inclusion, ReportsTheWorstViolation) {
  const std::vector<double> v{-3.0, -1.0, 1.0, 3.0};
  EXPECT_TRUE(spectral_inclusion(v, 1.0, 1.0, 0.0).passed);
  const std::vector<double> w{-3.5, 0.25, 2.0};
  const auto inc = spectral_inclusion(w, 1.0, 1.0, 1e-9);
  EXPECT_FALSE(inc.passed);
  EXPECT_DOUBLE_EQ(inc.worst_violation, 0.75);
}

TEST(Bands, ModelBandsAreKnown) {
  const auto bands = band_structure(test::model_coeffs(), 64);
  ASSERT_EQ(bands.size(), 64u);
  for (const auto& b : bands) {
    const double m = std::abs(std::complex<double>(2.0 - std::cos(b.theta), -std::sin(b.theta)));
    EXPECT_NEAR(b.bands[0], -m, 1e-14);
    EXPECT_NEAR(b.bands[1], m, 1e-14);
  }
  EXPECT_NEAR(bands[0].bands[1], 1.0, 1e-15);
  EXPECT_NEAR(bands[32].bands[1], 3.0, 1e-15);
  EXPECT_THROW(band_structure(test::model_coeffs(), 1), DomainError);
}

TEST(Bands, EvenInTheta) {
  std::mt19937_64 rng(21);
  const PeriodicCoefficients c(test::random_coefficients(2, 3, rng).matrices);
  const int K = 30;
  const auto bands = band_structure(c, K);
  for (int j = 1; j < K; ++j) {
    EXPECT_LE((bands[j].bands - bands[K - j].bands).cwiseAbs().maxCoeff(), 1e-12) << j;
    EXPECT_EQ(bands[j].bands.size(), 12);
  }
}

TEST(GapModes, ModelWindowHasNoneAtTwoSizes) {
  for (int M : {64, 128}) {
    const auto dec = eigendecompose(assemble(Window::symmetric(M), test::model_coeffs()));
    EXPECT_TRUE(gap_mode_report(dec).empty()) << M;
    EXPECT_GE(dec.eigenvalues.cwiseAbs().minCoeff(), 1.0 - 1e-10);
    EXPECT_LE(dec.eigenvalues.cwiseAbs().maxCoeff(), 3.0 + 1e-10);
  }
}

}  // namespace
}  // namespace dhs
