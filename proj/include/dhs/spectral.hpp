#pragma once

// Eigendecomposition of truncated A+S, the splitting E = E- (+) E+, the norm
// ||x|| = | |A+S|^{1/2} x |, and Bloch band structure.

#include <Eigen/Dense>

#include <vector>

#include "dhs/lattice.hpp"
#include "dhs/operators.hpp"

namespace dhs {

/// |lambda| below this is treated as a zero eigenvalue (no E+/E- split).
inline constexpr double kZeroEigenvalueTol = 1e-10;

struct SpectralDecomposition {
  Window window;
  int block_dim;
  Eigen::VectorXd eigenvalues;   // ascending
  Eigen::MatrixXd eigenvectors;  // orthonormal columns, largest entry of each column positive
  Eigen::Index split_index;      // first index with eigenvalue > 0
  double lambda0;
  double Lambda0;

  Eigen::Index size() const noexcept { return eigenvalues.size(); }
  /// Eigenbasis coordinates c = V^T x.
  Eigen::VectorXd coordinates(const BlockVector& x) const;
  /// Column i as a block vector on the decomposition's window.
  BlockVector eigenvector(Eigen::Index i) const;
};

/// Dense symmetric eigensolve, or LAPACK dsbev for banded storage.
SpectralDecomposition eigendecompose(const TruncatedOperator& op);

struct SplitVector {
  BlockVector minus;
  BlockVector plus;
};

/// x = x- + x+ with x- in the span of negative eigenvectors. Throws
/// SpectralGapError if some |eigenvalue| < kZeroEigenvalueTol.
SplitVector projectors(const SpectralDecomposition& dec, const BlockVector& x);

/// (sum_i |lambda_i| c_i^2)^{1/2}.
double e_norm(const SpectralDecomposition& dec, const BlockVector& x);

struct BandSample {
  double theta;
  Eigen::VectorXd bands;  // ascending, 2NT values
};

/// Symbol eigenvalues at theta_j = 2 pi j / grid_size, j = 0..grid_size-1.
std::vector<BandSample> band_structure(const PeriodicCoefficients& coeffs, int grid_size);

struct GapMode {
  Eigen::Index index;
  double eigenvalue;
  double boundary_mass;  // fraction of l2 mass within `boundary_layer` nodes of an edge
};

/// Eigenvalues inside (-lambda0 + tol, lambda0 - tol). On ZeroPad windows these
/// are truncation artifacts; on Periodic windows the list is empty.
std::vector<GapMode> gap_mode_report(const SpectralDecomposition& dec, double tol = 1e-10,
                                     int boundary_layer = 5);

struct InclusionCheck {
  bool passed;
  double worst_violation;  // largest distance outside [-L0-2,-l0] u [l0,L0+2]
};

/// Tests every value against the closed set [-Lambda0-2, -lambda0] u [lambda0, Lambda0+2].
InclusionCheck spectral_inclusion(std::span<const double> values, double lambda0, double Lambda0,
                                  double tol);

}  // namespace dhs
