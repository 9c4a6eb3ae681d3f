#include "dhs/verify.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dhs/errors.hpp"
#include "dhs/solver.hpp"

namespace dhs {
namespace {

// Below this a block norm carries no information about the decay rate.
constexpr double kDecayFloor = 1e-14;

}  // namespace

DhsResidual residual_DHS(const PeriodicCoefficients& coeffs, const Nonlinearity& nl, const BlockVector& x) {
  const int N = x.block_dim();
  if (coeffs.block_dim() != N || nl.block_dim() != N) {
    throw DimensionError("residual_DHS: block sizes of x, S and R differ");
  }
  const Window& w = x.window();
  const std::vector<double> zero(static_cast<std::size_t>(2 * N), 0.0);
  auto at = [&](int n) -> std::span<const double> {
    const auto m = w.resolve(n);
    return m ? x.block(*m) : std::span<const double>(zero);
  };

  DhsResidual out;
  out.per_node.reserve(static_cast<std::size_t>(w.count()));
  out.worst_node = w.first();
  for (int n = w.first(); n <= w.last(); ++n) {
    const auto cur = x.block(n);
    const auto next = at(n + 1);
    const auto prev = at(n - 1);
    const Eigen::Map<const Eigen::VectorXd> z(cur.data(), 2 * N);
    const Eigen::VectorXd dH = coeffs.at(n) * z + nl.gradient(n, z);
    double sq = 0.0;
    for (int i = 0; i < N; ++i) {
      const double r1 = next[i] - cur[i] + dH[N + i];
      const double r2 = cur[N + i] - prev[N + i] - dH[i];
      sq += r1 * r1 + r2 * r2;
    }
    const double r = std::sqrt(sq);
    out.per_node.push_back(r);
    if (r > out.inf_norm) {
      out.inf_norm = r;
      out.worst_node = n;
    }
  }
  return out;
}

DecayFit decay_fit(const BlockVector& x, double tail_fraction) {
  if (!(tail_fraction > 0.0 && tail_fraction <= 0.5)) {
    throw DomainError("decay_fit: tail_fraction must lie in (0, 1/2]");
  }
  const Window& w = x.window();
  const auto norms = block_norms(x);
  int lo = w.last() + 1;
  int hi = w.first() - 1;
  for (int n = w.first(); n <= w.last(); ++n) {
    if (norms[w.offset(n)] >= kDecayFloor) {
      lo = std::min(lo, n);
      hi = std::max(hi, n);
    }
  }
  DecayFit fit;
  if (lo > hi) return fit;

  const int span = hi - lo + 1;
  const int tail = std::max(1, static_cast<int>(std::floor(tail_fraction * span)));
  std::vector<int> left;
  std::vector<int> right;
  for (int n = lo; n < lo + tail; ++n) {
    if (norms[w.offset(n)] >= kDecayFloor) left.push_back(n);
  }
  for (int n = std::max(hi - tail + 1, lo + tail); n <= hi; ++n) {
    if (norms[w.offset(n)] >= kDecayFloor) right.push_back(n);
  }
  fit.samples = static_cast<int>(left.size() + right.size());
  if (fit.samples < 4) return fit;

  // Columns: [left intercept] [right intercept] |n|, empty sides dropped.
  const int cols = (left.empty() ? 0 : 1) + (right.empty() ? 0 : 1) + 1;
  Eigen::MatrixXd X = Eigen::MatrixXd::Zero(fit.samples, cols);
  Eigen::VectorXd y(fit.samples);
  int row = 0;
  auto add = [&](const std::vector<int>& side, int col) {
    for (int n : side) {
      X(row, col) = 1.0;
      X(row, cols - 1) = std::abs(n);
      y[row] = std::log(norms[w.offset(n)]);
      ++row;
    }
  };
  int col = 0;
  if (!left.empty()) add(left, col++);
  if (!right.empty()) add(right, col++);

  const Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(X);
  if (qr.rank() < cols) return fit;
  const Eigen::VectorXd beta = qr.solve(y);
  const double ss_res = (X * beta - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  fit.slope = beta[cols - 1];
  fit.rate = std::exp(fit.slope);
  fit.r_squared = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : (ss_res == 0.0 ? 1.0 : 0.0);
  fit.conclusive = true;
  return fit;
}

double energy_identity_check(const FunctionalContext& ctx, const BlockVector& x) {
  return std::abs(Phi(ctx, x) - sum_tildeR(ctx, x));
}

WindowStability window_stability(const FunctionalContext& ctx, const BlockVector& x, const SolveOptions& opts) {
  const Window& w = ctx.window();
  if (!w.is_symmetric()) throw ConfigurationError("window doubling needs a symmetric window [-M, M]");
  const int M = w.half_width();
  WindowStability out;
  out.doubled = Window::symmetric(std::max(2 * M, M + 1), w.boundary());

  SolveOptions inner = opts;
  inner.verify = false;
  inner.window_doubling = false;
  const FunctionalContext big = ctx.on_window(out.doubled);
  const SolveResult r = newton_solve(big, reembed(x, out.doubled), inner);
  out.iterations = r.iterations;
  out.converged = r.grad_inf_norm <= opts.grad_tol && r.status != SolveStatus::NotConverged;
  if (!out.converged) return out;

  double diff = 0.0;
  for (int n = w.first(); n <= w.last(); ++n) {
    const auto a = x.block(n);
    const auto b = r.orbit.block(n);
    double sq = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) sq += (a[i] - b[i]) * (a[i] - b[i]);
    diff = std::max(diff, std::sqrt(sq));
  }
  out.difference = diff;
  return out;
}

VerificationReport verify_orbit(const FunctionalContext& ctx, const BlockVector& x, const SolveOptions& opts) {
  const auto& tol = opts.tolerances;
  VerificationReport rep;
  auto fail = [&](const std::string& what, double value, double bound) {
    std::ostringstream os;
    os.precision(3);
    os << what << " " << value << " (bound " << bound << ")";
    rep.failures.push_back(os.str());
  };

  rep.linf_norm = linf_norm(x);
  rep.grad_inf_norm = linf_norm(grad_Phi(ctx, x));
  rep.nontrivial_ok = rep.linf_norm > opts.trivial_tol;
  if (!rep.nontrivial_ok) fail("trivial: l-infinity norm", rep.linf_norm, opts.trivial_tol);

  rep.residual = residual_DHS(ctx.coeffs(), ctx.nl(), x);
  rep.residual_ok = rep.residual.inf_norm < tol.dhs_residual;
  if (!rep.residual_ok) fail("difference-equation residual", rep.residual.inf_norm, tol.dhs_residual);

  rep.decay = decay_fit(x, tol.tail_fraction);
  rep.decay_ok = rep.decay.conclusive && rep.decay.rate < tol.decay_rate_max &&
                 rep.decay.r_squared > tol.decay_r_squared_min;
  if (!rep.decay.conclusive) {
    rep.failures.push_back("decay fit inconclusive (too few tail samples above 1e-14)");
  } else if (!rep.decay_ok) {
    std::ostringstream os;
    os << "decay rate " << rep.decay.rate << " with r^2 " << rep.decay.r_squared;
    rep.failures.push_back(os.str());
  }

  rep.energy_identity = energy_identity_check(ctx, x);
  rep.energy_ok = rep.energy_identity < tol.energy_identity;
  if (!rep.energy_ok) fail("energy identity defect", rep.energy_identity, tol.energy_identity);

  if (!opts.window_doubling) {
    rep.stability_ok = true;
  } else if (rep.nontrivial_ok) {
    rep.stability = window_stability(ctx, x, opts);
    rep.stability_ok = rep.stability->converged && rep.stability->difference < tol.window_stability;
    if (!rep.stability->converged) {
      rep.failures.push_back("re-solve on the doubled window did not converge");
    } else if (!rep.stability_ok) {
      fail("window-doubling difference", rep.stability->difference, tol.window_stability);
    }
  }

  rep.passed = rep.nontrivial_ok && rep.residual_ok && rep.decay_ok && rep.energy_ok && rep.stability_ok;
  return rep;
}

}  // namespace dhs
