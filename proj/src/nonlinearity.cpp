#include "dhs/nonlinearity.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "dhs/errors.hpp"
#include "dhs/operators.hpp"

namespace dhs {

Nonlinearity::Nonlinearity(std::string name, int block_dim, int period, ValueFn value, GradientFn gradient,
                           HessianFn hessian, std::vector<Eigen::MatrixXd> s_infinity, TildeFn tilde)
    : name_(std::move(name)), block_dim_(block_dim), period_(period), value_(std::move(value)),
      gradient_(std::move(gradient)), hessian_(std::move(hessian)), s_infinity_(std::move(s_infinity)),
      tilde_(std::move(tilde)) {
  if (block_dim_ < 1 || period_ < 1) throw DimensionError("nonlinearity needs N >= 1 and T >= 1");
  if (!value_ || !gradient_) throw ConfigurationError("nonlinearity needs value and gradient evaluators");
  if (static_cast<int>(s_infinity_.size()) != period_) {
    throw DimensionError("nonlinearity needs one S_inf matrix per period node");
  }
  lambda_infinity_ = kInfinity;
  for (const auto& s : s_infinity_) {
    if (s.rows() != 2 * block_dim_ || s.cols() != 2 * block_dim_) {
      throw DimensionError("S_inf(n) must be 2N x 2N");
    }
    if (!((s - s.transpose()).cwiseAbs().maxCoeff() <= kSymmetryTol)) {
      throw DomainError("S_inf(n) must be symmetric");
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s, Eigen::EigenvaluesOnly);
    lambda_infinity_ = std::min(lambda_infinity_, es.eigenvalues().minCoeff());
  }
}

Eigen::MatrixXd Nonlinearity::hessian(int n, const VectorRef& z) const {
  if (hessian_) return hessian_(n, z);
  const Eigen::Index d = z.size();
  const double h = 1e-6 * (1.0 + z.norm());
  Eigen::MatrixXd m(d, d);
  Eigen::VectorXd zp = z;
  Eigen::VectorXd zm = z;
  for (Eigen::Index j = 0; j < d; ++j) {
    zp[j] = z[j] + h;
    zm[j] = z[j] - h;
    m.col(j) = (gradient_(n, zp) - gradient_(n, zm)) / (2.0 * h);
    zp[j] = z[j];
    zm[j] = z[j];
  }
  return 0.5 * (m + m.transpose());
}

double eval_tildeR(const Nonlinearity& nl, int n, const VectorRef& z) {
  if (nl.tilde_) return nl.tilde_(n, z);
  return 0.5 * nl.gradient(n, z).dot(z) - nl.value(n, z);
}

namespace {

std::vector<Eigen::MatrixXd> scaled_identity(double c, int block_dim, int period) {
  return std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(period),
                                      c * Eigen::MatrixXd::Identity(2 * block_dim, 2 * block_dim));
}

void require_positive(double nu, const char* family) {
  if (!(nu > 0.0)) throw DomainError(std::string(family) + " requires nu > 0");
}

}  // namespace

Nonlinearity family_radial_rational(double nu, int block_dim, int period) {
  require_positive(nu, "radial_rational");
  auto value = [nu](int, const VectorRef& z) {
    const double r = z.squaredNorm();
    return 0.5 * nu * r * r / (1.0 + r);
  };
  auto gradient = [nu](int, const VectorRef& z) -> Eigen::VectorXd {
    const double r = z.squaredNorm();
    const double g = nu * (r * r + 2.0 * r) / ((1.0 + r) * (1.0 + r));
    return g * z;
  };
  auto hessian = [nu](int, const VectorRef& z) -> Eigen::MatrixXd {
    const double r = z.squaredNorm();
    const double g = nu * (r * r + 2.0 * r) / ((1.0 + r) * (1.0 + r));
    const double dg = 2.0 * nu / ((1.0 + r) * (1.0 + r) * (1.0 + r));
    Eigen::MatrixXd h = g * Eigen::MatrixXd::Identity(z.size(), z.size());
    h.noalias() += 2.0 * dg * z * z.transpose();
    return h;
  };
  auto tilde = [nu](int, const VectorRef& z) {
    const double r = z.squaredNorm();
    const double q = r / (1.0 + r);
    return 0.5 * nu * q * q;
  };
  return Nonlinearity("radial_rational", block_dim, period, value, gradient, hessian,
                      scaled_identity(nu, block_dim, period), tilde);
}

Nonlinearity family_log_saturating(double nu, int block_dim, int period) {
  require_positive(nu, "log_saturating");
  auto value = [nu](int, const VectorRef& z) {
    const double r = z.squaredNorm();
    // r - ln(1 + r) cancels badly for small r; use the series there.
    const double d = r < 1e-4 ? r * r * (0.5 - r * (1.0 / 3.0 - r * (0.25 - r / 5.0))) : r - std::log1p(r);
    return 0.5 * nu * d;
  };
  auto gradient = [nu](int, const VectorRef& z) -> Eigen::VectorXd {
    const double r = z.squaredNorm();
    return (nu * r / (1.0 + r)) * z;
  };
  auto hessian = [nu](int, const VectorRef& z) -> Eigen::MatrixXd {
    const double r = z.squaredNorm();
    Eigen::MatrixXd h = (nu * r / (1.0 + r)) * Eigen::MatrixXd::Identity(z.size(), z.size());
    h.noalias() += (2.0 * nu / ((1.0 + r) * (1.0 + r))) * z * z.transpose();
    return h;
  };
  auto tilde = [nu](int, const VectorRef& z) {
    const double r = z.squaredNorm();
    // ln(1 + r) - r / (1 + r) = r^2/2 - 2 r^3/3 + 3 r^4/4 - ...
    const double d = r < 1e-4 ? r * r * (0.5 - r * (2.0 / 3.0 - r * 0.75)) : std::log1p(r) - r / (1.0 + r);
    return 0.5 * nu * d;
  };
  return Nonlinearity("log_saturating", block_dim, period, value, gradient, hessian,
                      scaled_identity(nu, block_dim, period), tilde);
}

Nonlinearity family_quadratic(double c, int block_dim, int period) {
  if (!(c >= 0.0)) throw DomainError("quadratic family requires c >= 0");
  auto value = [c](int, const VectorRef& z) { return 0.5 * c * z.squaredNorm(); };
  auto gradient = [c](int, const VectorRef& z) -> Eigen::VectorXd { return c * z; };
  auto hessian = [c](int, const VectorRef& z) -> Eigen::MatrixXd {
    return c * Eigen::MatrixXd::Identity(z.size(), z.size());
  };
  auto tilde = [](int, const VectorRef&) { return 0.0; };
  return Nonlinearity("quadratic", block_dim, period, value, gradient, hessian,
                      scaled_identity(c, block_dim, period), tilde);
}

Nonlinearity make_family(const std::string& family, double parameter, int block_dim, int period) {
  if (family == "radial_rational") return family_radial_rational(parameter, block_dim, period);
  if (family == "log_saturating") return family_log_saturating(parameter, block_dim, period);
  if (family == "quadratic") return family_quadratic(parameter, block_dim, period);
  throw ConfigurationError("unknown nonlinearity family '" + family +
                           "' (expected radial_rational, log_saturating or quadratic)");
}

const char* to_string(Status s) noexcept {
  switch (s) {
    case Status::Pass: return "pass";
    case Status::Fail: return "fail";
    case Status::Inconclusive: return "inconclusive";
  }
  return "unknown";
}

const HypothesisEntry& HypothesisReport::entry(const std::string& hypothesis) const {
  for (const auto& e : entries)
    if (e.hypothesis == hypothesis) return e;
  throw ConfigurationError("no report entry for hypothesis " + hypothesis);
}

bool HypothesisReport::any_fail() const noexcept {
  return std::any_of(entries.begin(), entries.end(), [](const auto& e) { return e.status == Status::Fail; });
}

bool HypothesisReport::any_inconclusive() const noexcept {
  return std::any_of(entries.begin(), entries.end(),
                     [](const auto& e) { return e.status == Status::Inconclusive; });
}

namespace {

struct Sample {
  int n;
  double radius;
  Eigen::VectorXd z;
};

std::vector<double> log_grid(double lo, double hi, int count) {
  std::vector<double> out(static_cast<std::size_t>(count));
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < count; ++i) out[i] = std::exp(a + (b - a) * i / (count - 1));
  return out;
}

std::vector<Sample> draw_samples(const SamplingPlan& plan, int block_dim, int period,
                                 const std::vector<double>& radii) {
  std::mt19937_64 rng(plan.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<Sample> out;
  out.reserve(radii.size() * static_cast<std::size_t>(plan.directions * period));
  for (double radius : radii) {
    for (int d = 0; d < plan.directions; ++d) {
      Eigen::VectorXd dir(2 * block_dim);
      do {
        for (Eigen::Index i = 0; i < dir.size(); ++i) dir[i] = normal(rng);
      } while (dir.norm() == 0.0);
      dir.normalize();
      for (int n = 0; n < period; ++n) out.push_back({n, radius, radius * dir});
    }
  }
  return out;
}

Witness witness_of(const Sample& s, double measured, std::string quantity) {
  return Witness{s.n, std::vector<double>(s.z.data(), s.z.data() + s.z.size()), measured, std::move(quantity)};
}

void finalize(HypothesisEntry& e) {
  e.status = Status::Pass;
  for (const auto& c : e.checks) {
    if (c.status == Status::Fail) e.status = Status::Fail;
    else if (c.status == Status::Inconclusive && e.status == Status::Pass) e.status = Status::Inconclusive;
  }
}

Status vanishing_status(double measured, double scale, const SamplingPlan& plan) {
  if (measured <= plan.vanish_pass * scale) return Status::Pass;
  if (measured > plan.vanish_fail * scale) return Status::Fail;
  return Status::Inconclusive;
}

HypothesisEntry check_r0(const CoefficientMatrices& coeffs, std::optional<CoercivityBounds>& bounds) {
  HypothesisEntry e{"R0", Status::Pass, "", {}, std::nullopt};
  try {
    bounds = coercivity_bounds(coeffs);
    e.checks.push_back({"lambda0_positive", Status::Pass, bounds->lambda0, 0.0});
    std::ostringstream os;
    os << "J0 S(n) symmetric positive definite for all n; lambda0=" << bounds->lambda0
       << ", Lambda0=" << bounds->Lambda0;
    e.message = os.str();
  } catch (const HypothesisViolation& v) {
    const int t = v.node();
    const Eigen::MatrixXd k = StructureMatrices::make(coeffs.block_dim).J0 * coeffs.matrices[t];
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    e.checks.push_back({"lambda0_positive", Status::Fail, emin, 0.0});
    e.message = v.what();
    e.witness = Witness{t, {}, emin, "min eigenvalue of J0 S(n)"};
  }
  finalize(e);
  return e;
}

}  // namespace

HypothesisReport check_hypotheses(const Nonlinearity& nl, const CoefficientMatrices& coeffs,
                                  const SamplingPlan& plan) {
  coeffs.validate();
  if (nl.block_dim() != coeffs.block_dim) {
    throw DimensionError("nonlinearity block size N differs from coefficient block size");
  }
  const int T = coeffs.period();
  const auto radii = log_grid(plan.radius_min, plan.radius_max, plan.radii);
  const auto samples = draw_samples(plan, nl.block_dim(), T, radii);

  HypothesisReport report;
  std::optional<CoercivityBounds> bounds;
  report.entries.push_back(check_r0(coeffs, bounds));

  // Evaluate everything once.
  struct Eval {
    double value;
    double grad_norm;
    double grad_dot_z;
    double tilde;
  };
  auto evaluate = [&nl](const Sample& s) {
    const Eigen::VectorXd g = nl.gradient(s.n, s.z);
    const double v = nl.value(s.n, s.z);
    return Eval{v, g.norm(), g.dot(s.z), eval_tildeR(nl, s.n, s.z)};
  };
  std::vector<Eval> ev;
  ev.reserve(samples.size());
  for (const auto& s : samples) ev.push_back(evaluate(s));

  // (R1) periodicity in n
  {
    HypothesisEntry e{"R1", Status::Pass, "", {}, std::nullopt};
    double worst = 0.0;
    std::size_t worst_i = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const auto& s = samples[i];
      const double dv = std::abs(nl.value(s.n + T, s.z) - ev[i].value) / std::max(1.0, std::abs(ev[i].value));
      const double dg = (nl.gradient(s.n + T, s.z) - nl.gradient(s.n, s.z)).norm() / std::max(1.0, ev[i].grad_norm);
      const double d = std::max(dv, dg);
      if (d > worst) {
        worst = d;
        worst_i = i;
      }
    }
    const bool ok = worst <= 1e-12;
    e.checks.push_back({"periodicity_residual", ok ? Status::Pass : Status::Fail, worst, 1e-12});
    if (!ok) e.witness = witness_of(samples[worst_i], worst, "relative |R(n+T,z) - R(n,z)|");
    e.message = ok ? "R(n+T, z) = R(n, z) on all samples" : "R is not T-periodic in n";
    finalize(e);
    report.entries.push_back(std::move(e));
  }

  // (R2) R >= 0 and |grad R| / |z| -> 0 as |z| -> 0
  {
    HypothesisEntry e{"R2", Status::Pass, "", {}, std::nullopt};
    std::optional<std::size_t> negative;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (ev[i].value < 0.0 && (!negative || ev[i].value < ev[*negative].value)) negative = i;
    }
    e.checks.push_back({"nonnegative", negative ? Status::Fail : Status::Pass,
                        negative ? ev[*negative].value : 0.0, 0.0});
    // ratio at the smallest radius, maximized over directions and n
    double ratio = 0.0;
    std::size_t ratio_i = 0;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].radius != radii.front()) continue;
      const double q = ev[i].grad_norm / samples[i].radius;
      if (q >= ratio) {
        ratio = q;
        ratio_i = i;
      }
    }
    const Status vs = vanishing_status(ratio, 1.0, plan);
    e.checks.push_back({"gradient_vanishes_at_zero", vs, ratio, plan.vanish_pass});
    if (negative) {
      e.witness = witness_of(samples[*negative], ev[*negative].value, "R(n,z)");
      e.message = "R(n,z) < 0 at a sample";
    } else if (vs == Status::Fail) {
      e.witness = witness_of(samples[ratio_i], ratio, "|grad R(n,z)| / |z| at smallest radius");
      std::ostringstream os;
      os << "|grad R|/|z| = " << ratio << " at |z| = " << radii.front() << " does not vanish as |z| -> 0";
      e.message = os.str();
    } else {
      std::ostringstream os;
      os << "R >= 0 on all samples; |grad R|/|z| = " << ratio << " at |z| = " << radii.front();
      e.message = os.str();
    }
    finalize(e);
    report.entries.push_back(std::move(e));
  }

  // (R3) grad R - S_inf z = o(|z|) at infinity, and lambda_inf > 2 + Lambda0
  {
    HypothesisEntry e{"R3", Status::Pass, "", {}, std::nullopt};
    double ratio = 0.0;
    double scale = 1.0;
    std::size_t ratio_i = 0;
    for (int n = 0; n < T; ++n) scale = std::max(scale, nl.s_infinity(n).norm());
    for (std::size_t i = 0; i < samples.size(); ++i) {
      if (samples[i].radius != radii.back()) continue;
      const auto& s = samples[i];
      const double q = (nl.gradient(s.n, s.z) - nl.s_infinity(s.n) * s.z).norm() / s.radius;
      if (q >= ratio) {
        ratio = q;
        ratio_i = i;
      }
    }
    const Status vs = vanishing_status(ratio, scale, plan);
    e.checks.push_back({"asymptotic_remainder", vs, ratio, plan.vanish_pass * scale});

    const double lam_inf = nl.lambda_infinity();
    std::ostringstream os;
    if (!bounds) {
      e.checks.push_back({"gap", Status::Inconclusive, lam_inf, kInfinity});
      os << "lambda_inf = " << lam_inf << "; gap test needs Lambda0, unavailable since (R0) failed";
    } else {
      const double required = 2.0 + bounds->Lambda0;
      const bool gap_ok = lam_inf > required;
      e.checks.push_back({"gap", gap_ok ? Status::Pass : Status::Fail, lam_inf, required});
      if (!gap_ok) {
        int worst_n = 0;
        double worst_l = kInfinity;
        Eigen::VectorXd vec;
        for (int n = 0; n < T; ++n) {
          Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(nl.s_infinity(n));
          if (es.eigenvalues()[0] < worst_l) {
            worst_l = es.eigenvalues()[0];
            worst_n = n;
            vec = es.eigenvectors().col(0);
          }
        }
        e.witness = Witness{worst_n, std::vector<double>(vec.data(), vec.data() + vec.size()), worst_l,
                            "min eigenvalue of S_inf(n)"};
        os << "gap test failed: requires lambda_inf > 2+Lambda0 = " << required << ", got lambda_inf = "
           << lam_inf;
      } else {
        os << "lambda_inf = " << lam_inf << " > 2+Lambda0 = " << required;
      }
    }
    if (vs == Status::Fail && !e.witness) {
      e.witness = witness_of(samples[ratio_i], ratio, "|grad R - S_inf z| / |z| at largest radius");
    }
    os << "; |grad R - S_inf z|/|z| = " << ratio << " at |z| = " << radii.back();
    e.message = os.str();
    finalize(e);
    report.entries.push_back(std::move(e));
  }

  // (R4) R~ >= 0, and a uniform delta0 in (0, lambda0)
  {
    HypothesisEntry e{"R4", Status::Pass, "", {}, std::nullopt};
    const auto fine = log_grid(plan.radius_min, plan.radius_max, (plan.radii - 1) * std::max(1, plan.r4_refine) + 1);
    const auto samples = draw_samples(plan, nl.block_dim(), T, fine);
    std::vector<Eval> ev;
    ev.reserve(samples.size());
    for (const auto& s : samples) ev.push_back(evaluate(s));
    std::optional<std::size_t> negative;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      const double tol = 1e-12 * std::max({1.0, std::abs(ev[i].value), std::abs(ev[i].grad_dot_z)});
      if (ev[i].tilde < -tol && (!negative || ev[i].tilde < ev[*negative].tilde)) negative = i;
    }
    e.checks.push_back({"tildeR_nonnegative", negative ? Status::Fail : Status::Pass,
                        negative ? ev[*negative].tilde : 0.0, 0.0});
    std::ostringstream os;
    if (negative) {
      e.witness = witness_of(samples[*negative], ev[*negative].tilde, "R~(n,z)");
      os << "R~(n,z) < 0 at a sample";
    }
    if (!bounds) {
      e.checks.push_back({"delta0", Status::Inconclusive, 0.0, 0.0});
      if (!negative) os << "delta0 scan needs lambda0, unavailable since (R0) failed";
    } else {
      const double l0 = bounds->lambda0;
      auto grid = log_grid(1e-4 * l0, 0.999 * l0, plan.delta_grid);
      double found = 0.0;
      for (auto it = grid.rbegin(); it != grid.rend(); ++it) {
        const double delta = *it;
        bool ok = true;
        for (std::size_t i = 0; i < samples.size() && ok; ++i) {
          const double slack = 1e-12 * std::max({1.0, std::abs(ev[i].value), std::abs(ev[i].grad_dot_z)});
          if (ev[i].grad_norm >= (l0 - delta) * samples[i].radius && ev[i].tilde < delta - slack) ok = false;
        }
        if (ok) {
          found = delta;
          break;
        }
      }
      report.delta0_estimate = found;
      e.checks.push_back({"delta0", found > 0.0 ? Status::Pass : Status::Inconclusive, found, l0});
      if (!negative) {
        if (found > 0.0) os << "R~ >= 0 on all samples; delta0 estimate " << found << " in (0, lambda0=" << l0 << ")";
        else os << "R~ >= 0 on all samples, but no delta0 on the scan grid satisfies the implication";
      }
    }
    e.message = os.str();
    finalize(e);
    report.entries.push_back(std::move(e));
  }

  report.growth = fit_growth_envelope(nl, plan);
  return report;
}

GrowthEnvelope fit_growth_envelope(const Nonlinearity& nl, const SamplingPlan& plan, double epsilon, double p) {
  const auto radii = log_grid(plan.radius_min, plan.radius_max, plan.radii);
  const auto samples = draw_samples(plan, nl.block_dim(), nl.period(), radii);
  double c = 0.0;
  for (const auto& s : samples) {
    const double excess = nl.gradient(s.n, s.z).norm() - epsilon * s.radius;
    if (excess > 0.0) c = std::max(c, excess / std::pow(s.radius, p - 1.0));
  }
  c *= 2.0;

  std::vector<double> mids;
  for (std::size_t i = 0; i + 1 < radii.size(); ++i) mids.push_back(std::sqrt(radii[i] * radii[i + 1]));
  SamplingPlan refined = plan;
  refined.seed = plan.seed + 1;
  bool verified = std::isfinite(c);
  for (const auto& s : draw_samples(refined, nl.block_dim(), nl.period(), mids)) {
    const double lhs = nl.gradient(s.n, s.z).norm();
    const double rhs = epsilon * s.radius + c * std::pow(s.radius, p - 1.0);
    if (lhs > rhs * (1.0 + 1e-12)) {
      verified = false;
      break;
    }
  }
  return {epsilon, p, c, verified};
}

}  // namespace dhs
