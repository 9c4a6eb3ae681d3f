#pragma once

// The nonlinear part R(n, z) of H(n, z) = 1/2 S(n) z.z + R(n, z), built-in
// asymptotically quadratic families, and a sampling-based checker for the
// structural hypotheses (R0)-(R4).

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dhs/lattice.hpp"

namespace dhs {

using VectorRef = Eigen::Ref<const Eigen::VectorXd>;

class Nonlinearity {
 public:
  using ValueFn = std::function<double(int n, const VectorRef& z)>;
  using GradientFn = std::function<Eigen::VectorXd(int n, const VectorRef& z)>;
  using HessianFn = std::function<Eigen::MatrixXd(int n, const VectorRef& z)>;
  using TildeFn = std::function<double(int n, const VectorRef& z)>;

  /// `s_infinity` holds one symmetric 2N x 2N matrix per period node.
  /// `tilde` is an optional closed form of R~; without it R~ is formed from
  /// R and grad R, which loses all digits once |z| is large.
  Nonlinearity(std::string name, int block_dim, int period, ValueFn value, GradientFn gradient,
               HessianFn hessian, std::vector<Eigen::MatrixXd> s_infinity, TildeFn tilde = nullptr);

  const std::string& name() const noexcept { return name_; }
  int block_dim() const noexcept { return block_dim_; }
  int period() const noexcept { return period_; }

  double value(int n, const VectorRef& z) const { return value_(n, z); }
  Eigen::VectorXd gradient(int n, const VectorRef& z) const { return gradient_(n, z); }
  bool has_hessian() const noexcept { return static_cast<bool>(hessian_); }
  /// Closed-form Hessian when provided, else central differences of the
  /// gradient with step 1e-6 (1 + |z|), symmetrized.
  Eigen::MatrixXd hessian(int n, const VectorRef& z) const;
  bool has_tilde() const noexcept { return static_cast<bool>(tilde_); }

  const Eigen::MatrixXd& s_infinity(int n) const { return s_infinity_[coefficient_index(n, period_)]; }
  /// min over n of the eigenvalues of S_inf(n).
  double lambda_infinity() const noexcept { return lambda_infinity_; }

 private:
  std::string name_;
  int block_dim_;
  int period_;
  ValueFn value_;
  GradientFn gradient_;
  HessianFn hessian_;
  std::vector<Eigen::MatrixXd> s_infinity_;
  TildeFn tilde_;
  double lambda_infinity_;

  friend double eval_tildeR(const Nonlinearity& nl, int n, const VectorRef& z);
};

/// R~(n, z) = 1/2 grad R(n, z).z - R(n, z)
double eval_tildeR(const Nonlinearity& nl, int n, const VectorRef& z);

/// R = (nu/2) |z|^4 / (1 + |z|^2), S_inf = nu I.
Nonlinearity family_radial_rational(double nu, int block_dim = 1, int period = 1);
/// R = (nu/2) (|z|^2 - ln(1 + |z|^2)), S_inf = nu I.
Nonlinearity family_log_saturating(double nu, int block_dim = 1, int period = 1);
/// R = (c/2) |z|^2, S_inf = c I; c = 0 gives the zero nonlinearity. Violates
/// (R2) for c > 0; used to exercise the checker and the linear problem.
Nonlinearity family_quadratic(double c, int block_dim = 1, int period = 1);

/// Builds a family by name ("radial_rational", "log_saturating",
/// "quadratic") from its parameter; throws ConfigurationError otherwise.
Nonlinearity make_family(const std::string& family, double parameter, int block_dim, int period);

enum class Status { Pass, Fail, Inconclusive };
const char* to_string(Status s) noexcept;

struct Witness {
  int n = 0;
  std::vector<double> z;  // empty for coefficient-only hypotheses
  double measured = 0.0;
  std::string quantity;
};

struct SubCheck {
  std::string name;
  Status status;
  double measured;
  double bound;
};

struct HypothesisEntry {
  std::string hypothesis;  // "R0" .. "R4"
  Status status = Status::Pass;
  std::string message;
  std::vector<SubCheck> checks;
  std::optional<Witness> witness;  // always present on Fail
};

struct GrowthEnvelope {
  double epsilon;
  double exponent;  // p in |grad R| <= eps |z| + C |z|^{p-1}
  double constant;
  bool verified;
};

struct HypothesisReport {
  std::vector<HypothesisEntry> entries;  // R0, R1, R2, R3, R4 in order
  double delta0_estimate = 0.0;          // 0 when no delta on the scan grid works
  std::optional<GrowthEnvelope> growth;

  const HypothesisEntry& entry(const std::string& hypothesis) const;
  bool any_fail() const noexcept;
  bool any_inconclusive() const noexcept;
};

struct SamplingPlan {
  double radius_min = 1e-8;
  double radius_max = 1e8;
  int radii = 64;
  int directions = 32;
  std::uint64_t seed = 0;
  int delta_grid = 50;
  // (R4) is read on a finer radial grid: `r4_refine` sub-steps per interval,
  // since the delta0 bound is set by samples right at |grad R| = (lambda0 - delta)|z|.
  int r4_refine = 16;
  // The (R2)/(R3) ratios are read at the smallest/largest radius: pass below
  // `vanish_pass`, fail above `vanish_fail` (scaled by max(1, |S_inf|) for (R3)).
  double vanish_pass = 1e-6;
  double vanish_fail = 1e-3;
};

/// Samples R on the plan's (n, z) grid and reports each hypothesis as pass,
/// fail or inconclusive. Nothing here proves a hypothesis; "pass" means no
/// violation was found on the plan.
HypothesisReport check_hypotheses(const Nonlinearity& nl, const CoefficientMatrices& coeffs,
                                  const SamplingPlan& plan = {});
inline HypothesisReport check_hypotheses(const Nonlinearity& nl, const PeriodicCoefficients& coeffs,
                                         const SamplingPlan& plan = {}) {
  return check_hypotheses(nl, coeffs.raw(), plan);
}

/// Fits C in |grad R| <= eps |z| + C |z|^{p-1} on the plan's samples (with a
/// factor-2 margin) and verifies it on the geometric midpoints of the radial grid.
GrowthEnvelope fit_growth_envelope(const Nonlinearity& nl, const SamplingPlan& plan, double epsilon = 0.1,
                                   double p = 4.0);

}  // namespace dhs
