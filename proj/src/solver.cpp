#include "dhs/solver.hpp"

#include <lapacke.h>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <random>
#include <sstream>
#include <thread>

#include "dhs/errors.hpp"

namespace dhs {

const char* to_string(StartStrategy s) noexcept {
  switch (s) {
    case StartStrategy::LinkingDirection: return "linking_direction";
    case StartStrategy::GaussianBump: return "gaussian_bump";
    case StartStrategy::Random: return "random";
    case StartStrategy::Explicit: return "explicit";
  }
  return "?";
}

StartStrategy parse_strategy(const std::string& name) {
  for (auto s : {StartStrategy::LinkingDirection, StartStrategy::GaussianBump, StartStrategy::Random,
                 StartStrategy::Explicit}) {
    if (name == to_string(s)) return s;
  }
  throw ConfigurationError("unknown start strategy '" + name +
                           "' (expected linking_direction, gaussian_bump, random or explicit)");
}

std::string StartSpec::tag() const {
  std::ostringstream os;
  os << to_string(strategy);
  if (strategy == StartStrategy::Explicit) return os.str();
  os << "(a=" << amplitude;
  if (width) os << ",w=" << *width;
  os << ")";
  return os.str();
}

const char* to_string(SolveStatus s) noexcept {
  switch (s) {
    case SolveStatus::Success: return "success";
    case SolveStatus::NotConverged: return "not_converged";
    case SolveStatus::RejectedTrivial: return "rejected_trivial";
    case SolveStatus::VerificationFailed: return "verification_failed";
  }
  return "?";
}

BlockVector linking_direction(const SpectralDecomposition& dec) {
  // Skip truncation artifacts in (0, lambda0).
  Eigen::Index pick = -1;
  for (Eigen::Index i = dec.split_index; i < dec.size(); ++i) {
    if (dec.eigenvalues[i] >= dec.lambda0 - kZeroEigenvalueTol) {
      pick = i;
      break;
    }
  }
  if (pick < 0) pick = dec.split_index;
  if (pick >= dec.size()) throw NumericalError("A+S has no positive eigenvalue on this window");
  return dec.eigenvector(pick);
}

BlockVector initial_guess(const StartSpec& spec, const FunctionalContext& ctx, std::uint64_t seed,
                          std::uint64_t stream) {
  const Window& w = ctx.window();
  const int N = ctx.block_dim();
  if (spec.strategy == StartStrategy::Explicit) {
    if (!spec.vector) throw ConfigurationError("explicit start without a vector");
    if (spec.vector->block_dim() != N) throw DimensionError("explicit start has the wrong block size N");
    return reembed(*spec.vector, w);
  }
  if (!(spec.amplitude >= 0.0) || !std::isfinite(spec.amplitude)) {
    throw DomainError("start amplitude must be finite and non-negative");
  }

  BlockVector x(w, N);
  switch (spec.strategy) {
    case StartStrategy::LinkingDirection: {
      x = linking_direction(ctx.spectrum());
      x *= spec.amplitude;
      break;
    }
    case StartStrategy::GaussianBump: {
      const double width = spec.width.value_or(std::max(1.0, w.half_width() / 8.0));
      if (!(width > 0.0)) throw DomainError("gaussian_bump width must be positive");
      const double center = 0.5 * (w.first() + w.last());
      const double u = 1.0 / std::sqrt(2.0 * N);
      for (int n = w.first(); n <= w.last(); ++n) {
        const double d = (n - center) / width;
        for (double& v : x.block(n)) v = spec.amplitude * std::exp(-d * d) * u;
      }
      break;
    }
    case StartStrategy::Random: {
      std::mt19937_64 rng(seed ^ (0x9E3779B97F4A7C15ULL * (stream + 1)));
      std::normal_distribution<double> gauss;
      for (double& v : x.data()) v = gauss(rng);
      const double norm = l2_norm(x);
      if (norm > 0.0) x *= spec.amplitude / norm;
      break;
    }
    case StartStrategy::Explicit: break;
  }
  return x;
}

namespace {

double sq_norm(const BlockVector& v) { return l2_inner(v, v); }

// Jacobian of grad Phi: (A+S) - blockdiag(Hess R(n, x(n))). Symmetric.
class Jacobian {
 public:
  explicit Jacobian(const FunctionalContext& ctx) : ctx_(ctx), banded_(ctx.op().storage() == Storage::Banded) {
    if (!banded_) base_ = ctx.op().dense();
  }

  void update(const BlockVector& x) {
    const Window& w = x.window();
    const int width = x.width();
    hess_.resize(static_cast<std::size_t>(w.count()));
    for (int n = w.first(); n <= w.last(); ++n) {
      const auto b = x.block(n);
      hess_[w.offset(n)] = ctx_.nl().hessian(n, Eigen::Map<const Eigen::VectorXd>(b.data(), width));
    }
  }

  // y = J v
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const {
    Eigen::VectorXd y(v.size());
    ctx_.op().apply({v.data(), static_cast<std::size_t>(v.size())}, {y.data(), static_cast<std::size_t>(y.size())});
    const int width = 2 * ctx_.block_dim();
    for (std::size_t k = 0; k < hess_.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(k) * width;
      y.segment(off, width).noalias() -= hess_[k] * v.segment(off, width);
    }
    return y;
  }

  // Solves (J + tau I) d = rhs; false if the matrix is numerically singular.
  bool solve(const Eigen::VectorXd& rhs, double tau, Eigen::VectorXd& d) const {
    return banded_ ? solve_banded(rhs, tau, d) : solve_dense(rhs, tau, d);
  }

 private:
  static constexpr double kMinRcond = 1e-14;

  bool solve_dense(const Eigen::VectorXd& rhs, double tau, Eigen::VectorXd& d) const {
    Eigen::MatrixXd J = base_;
    const int width = 2 * ctx_.block_dim();
    for (std::size_t k = 0; k < hess_.size(); ++k) {
      const auto off = static_cast<Eigen::Index>(k) * width;
      J.block(off, off, width, width) -= hess_[k];
    }
    J.diagonal().array() += tau;
    const Eigen::PartialPivLU<Eigen::MatrixXd> lu(J);
    if (!(lu.rcond() > kMinRcond)) return false;
    d = lu.solve(rhs);
    return d.allFinite();
  }

  bool solve_banded(const Eigen::VectorXd& rhs, double tau, Eigen::VectorXd& d) const {
    const auto n = static_cast<lapack_int>(rhs.size());
    const lapack_int kl = ctx_.op().bandwidth();
    const lapack_int ku = kl;
    const lapack_int ldab = 2 * kl + ku + 1;
    // Column-major general band with kl extra rows for the LU fill-in:
    // ab(kl + ku + i - j, j) = J(i, j).
    std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
    auto at = [&](lapack_int i, lapack_int j) -> double& {
      return ab[static_cast<std::size_t>(j) * ldab + (kl + ku + i - j)];
    };
    const auto& diags = ctx_.op().diagonals();
    for (lapack_int k = 0; k <= ku; ++k) {
      for (std::size_t i = 0; i < diags[k].size(); ++i) {
        const auto r = static_cast<lapack_int>(i);
        at(r, r + k) = diags[k][i];
        if (k > 0) at(r + k, r) = diags[k][i];
      }
    }
    const int width = 2 * ctx_.block_dim();
    for (std::size_t k = 0; k < hess_.size(); ++k) {
      const auto off = static_cast<lapack_int>(k) * width;
      for (int r = 0; r < width; ++r) {
        for (int c = 0; c < width; ++c) at(off + r, off + c) -= hess_[k](r, c);
      }
    }
    for (lapack_int i = 0; i < n; ++i) at(i, i) += tau;

    double anorm = 0.0;
    for (lapack_int j = 0; j < n; ++j) {
      double col = 0.0;
      for (lapack_int i = std::max<lapack_int>(0, j - ku); i <= std::min(n - 1, j + kl); ++i) col += std::abs(at(i, j));
      anorm = std::max(anorm, col);
    }
    std::vector<lapack_int> ipiv(static_cast<std::size_t>(n));
    if (LAPACKE_dgbtrf(LAPACK_COL_MAJOR, n, n, kl, ku, ab.data(), ldab, ipiv.data()) != 0) return false;
    double rcond = 0.0;
    if (LAPACKE_dgbcon(LAPACK_COL_MAJOR, '1', n, kl, ku, ab.data(), ldab, ipiv.data(), anorm, &rcond) != 0 ||
        !(rcond > kMinRcond)) {
      return false;
    }
    d = rhs;
    if (LAPACKE_dgbtrs(LAPACK_COL_MAJOR, 'N', n, kl, ku, 1, ab.data(), ldab, ipiv.data(), d.data(), n) != 0) {
      return false;
    }
    return d.allFinite();
  }

  const FunctionalContext& ctx_;
  bool banded_;
  Eigen::MatrixXd base_;
  std::vector<Eigen::MatrixXd> hess_;
};

}  // namespace

SolveResult newton_solve(const FunctionalContext& ctx, const BlockVector& x0, const SolveOptions& opts) {
  if (!x0.same_shape(BlockVector(ctx.window(), ctx.block_dim()))) {
    throw DimensionError("newton_solve: start does not live on the functional's window");
  }
  SolveResult res;
  res.orbit = x0;
  BlockVector& x = res.orbit;
  BlockVector F = grad_Phi(ctx, x);
  double f2 = sq_norm(F);
  Jacobian jac(ctx);
  bool converged = false;

  for (;;) {
    res.residual_history.push_back(std::sqrt(f2));
    res.grad_inf_norm = linf_norm(F);
    if (!std::isfinite(f2)) break;
    if (res.grad_inf_norm <= opts.grad_tol) {
      converged = true;
      break;
    }
    if (res.iterations >= opts.max_iter) break;
    ++res.iterations;

    jac.update(x);
    const Eigen::VectorXd rhs = -F.vec();
    Eigen::VectorXd d;
    bool have_dir = jac.solve(rhs, 0.0, d);
    for (double tau = opts.regularization; !have_dir && tau <= opts.regularization * std::ldexp(1.0, opts.max_regularizations);
         tau *= 2.0) {
      have_dir = jac.solve(rhs, tau, d);
      if (have_dir) ++res.regularizations;
    }

    bool stepped = false;
    if (have_dir) {
      BlockVector dir(x.window(), x.block_dim());
      dir.vec() = d;
      for (double t = 1.0; t >= opts.min_step; t *= opts.backtrack_shrink) {
        BlockVector trial = x + t * dir;
        BlockVector Ft = grad_Phi(ctx, trial);
        const double ft2 = sq_norm(Ft);
        if (std::isfinite(ft2) && ft2 <= (1.0 - 2.0 * opts.sufficient_decrease * t) * f2) {
          x = std::move(trial);
          F = std::move(Ft);
          f2 = ft2;
          stepped = true;
          break;
        }
      }
    }
    if (!stepped) {
      // Steepest descent on 1/2 |F|^2: direction -J F, Cauchy step first.
      const Eigen::VectorXd g = jac.apply(F.vec());
      const double g2 = g.squaredNorm();
      const double Jg2 = jac.apply(g).squaredNorm();
      if (g2 > 0.0 && Jg2 > 0.0) {
        BlockVector dir(x.window(), x.block_dim());
        dir.vec() = -g;
        for (double t = g2 / Jg2; t * std::sqrt(g2) >= opts.min_step; t *= opts.backtrack_shrink) {
          BlockVector trial = x + t * dir;
          BlockVector Ft = grad_Phi(ctx, trial);
          const double ft2 = sq_norm(Ft);
          if (std::isfinite(ft2) && 0.5 * ft2 <= 0.5 * f2 - opts.sufficient_decrease * t * g2) {
            x = std::move(trial);
            F = std::move(Ft);
            f2 = ft2;
            stepped = true;
            ++res.descent_steps;
            break;
          }
        }
      }
    }
    if (!stepped) break;  // stalled
  }

  res.phi = Phi(ctx, x);
  if (!converged) {
    res.status = SolveStatus::NotConverged;
  } else if (linf_norm(x) <= opts.trivial_tol) {
    res.status = SolveStatus::RejectedTrivial;
  } else if (!opts.verify) {
    res.status = SolveStatus::Success;
  } else {
    res.verification = verify_orbit(ctx, x, opts);
    res.status = res.verification->passed ? SolveStatus::Success : SolveStatus::VerificationFailed;
  }
  return res;
}

std::vector<StartSpec> default_starts() {
  std::vector<StartSpec> s;
  for (double a : {1.0, 1.5, 2.0, 3.0, 5.0, 8.0}) s.push_back({StartStrategy::LinkingDirection, a, {}, {}});
  for (double w : {2.0, 3.0}) {
    for (double a : {0.5, 1.0, 2.0, 3.0}) s.push_back({StartStrategy::GaussianBump, a, w, {}});
  }
  for (double a : {2.0, 4.0}) s.push_back({StartStrategy::Random, a, {}, {}});
  return s;
}

double shift_aligned_distance(const BlockVector& a, const BlockVector& b, int period) {
  if (!a.same_shape(b)) throw DimensionError("shift_aligned_distance: vectors have different shapes");
  if (period < 1) throw DomainError("period must be positive");
  const int count = a.window().count();
  double best = kInfinity;
  for (int k = -(count / period) * period; k < count; k += period) {
    best = std::min(best, linf_norm(shift(a, k) - b));
  }
  return best;
}

std::vector<SolveResult> multi_start(const FunctionalContext& ctx_in, const SolveOptions& opts) {
  const std::vector<StartSpec> starts = opts.starts.empty() ? default_starts() : opts.starts;
  const bool need_spectrum = std::any_of(starts.begin(), starts.end(), [](const StartSpec& s) {
    return s.strategy == StartStrategy::LinkingDirection;
  });
  const FunctionalContext ctx = need_spectrum ? ctx_in.with_spectrum() : ctx_in;

  std::vector<SolveResult> all(starts.size());
  auto run = [&](std::size_t i) {
    const BlockVector x0 = initial_guess(starts[i], ctx, opts.seed, i);
    all[i] = newton_solve(ctx, x0, opts);
    all[i].start = starts[i].tag();
  };
  const auto threads = static_cast<std::size_t>(std::max(1, opts.threads));
  if (threads == 1) {
    for (std::size_t i = 0; i < starts.size(); ++i) run(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr error;
    std::mutex error_mutex;
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < std::min(threads, starts.size()); ++t) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < starts.size(); i = next++) {
          try {
            run(i);
          } catch (...) {
            const std::lock_guard lock(error_mutex);
            if (!error) error = std::current_exception();
          }
        }
      });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
  }

  std::vector<SolveResult> kept;
  const int T = ctx.coeffs().period();
  for (auto& r : all) {
    if (!r.success()) continue;
    const bool dup = std::any_of(kept.begin(), kept.end(), [&](const SolveResult& k) {
      return shift_aligned_distance(r.orbit, k.orbit, T) < 1e-6;
    });
    if (!dup) kept.push_back(std::move(r));
  }
  std::stable_sort(kept.begin(), kept.end(), [](const SolveResult& a, const SolveResult& b) { return a.phi < b.phi; });
  return kept;
}

ContinuationResult continuation(const std::function<FunctionalContext(double)>& family, double nu_from,
                                double nu_to, int steps, const SolveOptions& opts) {
  if (steps < 1) throw DomainError("continuation needs steps >= 1");
  if (!(nu_from > 0.0 && nu_to > 0.0)) throw DomainError("continuation parameters must be positive");

  ContinuationResult out;
  const auto seeds = multi_start(family(nu_from), opts);
  if (seeds.empty()) {
    std::ostringstream os;
    os << "continuation: no verified orbit at the starting parameter " << nu_from;
    throw NumericalError(os.str());
  }
  out.steps.push_back({nu_from, seeds.front()});
  out.last_good = nu_from;

  for (int k = 1; k <= steps; ++k) {
    const double nu = nu_from * std::pow(nu_to / nu_from, static_cast<double>(k) / steps);
    if (nu == out.last_good) continue;
    const FunctionalContext ctx = family(nu);
    SolveResult r = newton_solve(ctx, reembed(out.steps.back().result.orbit, ctx.window()), opts);
    r.start = "continuation";
    if (!r.success()) {
      out.failure = ContinuationStep{nu, std::move(r)};
      return out;
    }
    out.steps.push_back({nu, std::move(r)});
    out.last_good = nu;
  }
  out.completed = true;
  return out;
}

}  // namespace dhs
