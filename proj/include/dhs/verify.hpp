#pragma once

// A-posteriori checks on a computed critical point: the difference-equation
// residual, exponential decay of the tails, the energy identity at a critical
// point, and stability under doubling of the window.

#include <limits>
#include <string>
#include <vector>

#include "dhs/functional.hpp"
#include "dhs/solve_options.hpp"

namespace dhs {

struct DhsResidual {
  std::vector<double> per_node;  // |r(n)|, Euclidean in R^{2N}
  double inf_norm = 0.0;
  int worst_node = 0;
};

/// r1(n) = x1(n+1) - x1(n) + H_{x2}(n, x(n)),  r2(n) = x2(n) - x2(n-1) - H_{x1}(n, x(n)),
/// with grad H = S(n) z + grad R(n, z). Evaluated straight from the difference
/// equations; neighbours outside a ZeroPad window are zero.
DhsResidual residual_DHS(const PeriodicCoefficients& coeffs, const Nonlinearity& nl, const BlockVector& x);

struct DecayFit {
  double rate = std::numeric_limits<double>::quiet_NaN();  // exp(slope) per node
  double slope = std::numeric_limits<double>::quiet_NaN();
  double r_squared = 0.0;
  int samples = 0;
  bool conclusive = false;
};

/// Least-squares fit of log|x(n)| = c_side + slope |n| over the outer
/// `tail_fraction` of the nodes with |x(n)| >= 1e-14 on each side (common
/// slope, one intercept per side). Fewer than 4 usable samples: inconclusive.
DecayFit decay_fit(const BlockVector& x, double tail_fraction = 0.25);

/// |Phi(x) - sum_n R~(n, x(n))|; vanishes at critical points.
double energy_identity_check(const FunctionalContext& ctx, const BlockVector& x);

struct WindowStability {
  bool converged = false;
  double difference = std::numeric_limits<double>::infinity();  // l-infinity over the original nodes
  int iterations = 0;
  Window doubled = Window::symmetric(0);
};

/// Re-solves from `x` reembedded on the window of half-width 2M and compares.
WindowStability window_stability(const FunctionalContext& ctx, const BlockVector& x, const SolveOptions& opts);

struct VerificationReport {
  double linf_norm = 0.0;
  double grad_inf_norm = 0.0;
  DhsResidual residual;
  DecayFit decay;
  double energy_identity = 0.0;
  std::optional<WindowStability> stability;  // unset when doubling is off or x is trivial

  bool nontrivial_ok = false;
  bool residual_ok = false;
  bool decay_ok = false;
  bool energy_ok = false;
  bool stability_ok = false;
  bool passed = false;
  std::vector<std::string> failures;
};

VerificationReport verify_orbit(const FunctionalContext& ctx, const BlockVector& x, const SolveOptions& opts);

}  // namespace dhs
