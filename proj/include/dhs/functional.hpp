#pragma once

// Phi(x) = 1/2 ((A+S)x, x) - Psi(x),  Psi(x) = sum_n R(n, x(n)),
// its l^2 gradient and the split form 1/2 ||x+||^2 - 1/2 ||x-||^2 - Psi(x).

#include <memory>

#include "dhs/lattice.hpp"
#include "dhs/nonlinearity.hpp"
#include "dhs/operators.hpp"
#include "dhs/spectral.hpp"

namespace dhs {

/// Everything needed to evaluate Phi on one window. Cheap to copy: the
/// operator, decomposition and nonlinearity are shared and immutable.
class FunctionalContext {
 public:
  FunctionalContext(std::shared_ptr<const TruncatedOperator> op, std::shared_ptr<const Nonlinearity> nl,
                    std::shared_ptr<const SpectralDecomposition> dec = nullptr);

  /// Assembles A+S on `window`; `with_spectrum` also eigendecomposes it.
  static FunctionalContext build(const Window& window, const PeriodicCoefficients& coeffs, Nonlinearity nl,
                                 bool with_spectrum = false);

  /// Same coefficients and nonlinearity on another window.
  FunctionalContext on_window(const Window& window, bool with_spectrum = false) const;
  /// This context with its operator eigendecomposed (no-op if already done).
  FunctionalContext with_spectrum() const;

  const TruncatedOperator& op() const noexcept { return *op_; }
  const Nonlinearity& nl() const noexcept { return *nl_; }
  const PeriodicCoefficients& coeffs() const noexcept { return op_->coeffs(); }
  const Window& window() const noexcept { return op_->window(); }
  int block_dim() const noexcept { return op_->block_dim(); }
  bool has_spectrum() const noexcept { return static_cast<bool>(dec_); }
  /// Throws ConfigurationError when no decomposition is attached.
  const SpectralDecomposition& spectrum() const;

  std::shared_ptr<const Nonlinearity> nl_ptr() const noexcept { return nl_; }

 private:
  std::shared_ptr<const TruncatedOperator> op_;
  std::shared_ptr<const Nonlinearity> nl_;
  std::shared_ptr<const SpectralDecomposition> dec_;
};

double Psi(const FunctionalContext& ctx, const BlockVector& x);
double Phi(const FunctionalContext& ctx, const BlockVector& x);

/// g(n) = ((A+S)x)(n) - grad R(n, x(n)); l2_inner(g, y) = Phi'(x) y.
BlockVector grad_Phi(const FunctionalContext& ctx, const BlockVector& x);

struct PhiSplit {
  double plus_part;   // 1/2 ||x+||^2
  double minus_part;  // 1/2 ||x-||^2
  double psi;

  double phi() const noexcept { return plus_part - minus_part - psi; }
};

/// Needs a context with spectrum.
PhiSplit Phi_split(const FunctionalContext& ctx, const BlockVector& x);

/// sum_n R~(n, x(n))
double sum_tildeR(const FunctionalContext& ctx, const BlockVector& x);

/// [Phi(x) - 1/2 (grad_Phi(x), x)] - sum_n R~(n, x(n)); zero up to rounding
/// for every x, since the quadratic parts cancel.
double energy_defect(const FunctionalContext& ctx, const BlockVector& x);

}  // namespace dhs
