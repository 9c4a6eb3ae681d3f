#pragma once

// The bounded self-adjoint operators of the variational setting:
//
//   (Ax)(n) = -J (L x(n) - L x(n-1)) = ( x2(n) - x2(n-1), x1(n) - x1(n+1) )
//   (Sx)(n) = -S(n) x(n)
//
// their truncation to a window, and the Bloch symbol of A+S.

#include <Eigen/Dense>

#include <optional>
#include <vector>

#include "dhs/lattice.hpp"

namespace dhs {

BlockVector apply_A(const BlockVector& x);
/// Note the sign: z(n) = -S(n mod T) x(n).
BlockVector apply_S(const BlockVector& x, const PeriodicCoefficients& coeffs);

struct CoercivityBounds {
  double lambda0;
  double Lambda0;
};

/// Extreme eigenvalues of J0 S(n) over one period. Throws HypothesisViolation
/// ("R0") naming the first n where J0 S(n) is not symmetric positive definite.
CoercivityBounds coercivity_bounds(const CoefficientMatrices& coeffs);
inline CoercivityBounds coercivity_bounds(const PeriodicCoefficients& coeffs) {
  return {coeffs.lambda0(), coeffs.Lambda0()};
}

enum class Storage { Dense, Banded };

/// Windows with more nodes than this are stored banded (ZeroPad only; the
/// wrap-around couplings of a Periodic window are not banded).
inline constexpr int kBandedNodeThreshold = 512;

/// Matrix of A+S on a window, node-major / block-minor basis.
class TruncatedOperator {
 public:
  TruncatedOperator(Window window, PeriodicCoefficients coeffs, Storage storage);

  const Window& window() const noexcept { return window_; }
  const PeriodicCoefficients& coeffs() const noexcept { return coeffs_; }
  int block_dim() const noexcept { return coeffs_.block_dim(); }
  Eigen::Index dim() const noexcept { return dim_; }
  Storage storage() const noexcept { return storage_; }
  /// Number of super-diagonals kept in banded storage (2N - 1).
  int bandwidth() const noexcept { return 2 * block_dim() - 1; }

  BlockVector apply(const BlockVector& x) const;
  void apply(std::span<const double> x, std::span<double> y) const;

  /// Full symmetric matrix (materialized from the band when banded).
  Eigen::MatrixXd dense() const;
  /// Banded storage: diagonals()[k][i] = H(i, i + k), k = 0..bandwidth().
  const std::vector<std::vector<double>>& diagonals() const noexcept { return diagonals_; }

 private:
  Window window_;
  PeriodicCoefficients coeffs_;
  Storage storage_;
  Eigen::Index dim_;
  Eigen::MatrixXd dense_;
  std::vector<std::vector<double>> diagonals_;
};

/// Assembles A+S on `window`. Periodic windows must hold whole period cells.
/// Storage defaults to dense up to kBandedNodeThreshold nodes.
TruncatedOperator assemble(const Window& window, const PeriodicCoefficients& coeffs,
                           std::optional<Storage> storage = std::nullopt);

/// Bloch symbol of A+S at quasimomentum theta, acting on one period cell of
/// sequences with x(n + T) = e^{i theta} x(n). Hermitian, size 2NT.
Eigen::MatrixXcd floquet_symbol(double theta, const PeriodicCoefficients& coeffs);

}  // namespace dhs
