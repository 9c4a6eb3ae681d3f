#include <gtest/gtest.h>

#include <random>

#include "dhs/errors.hpp"
#include "dhs/nonlinearity.hpp"
#include "support.hpp"

namespace dhs {
namespace {

Eigen::VectorXd random_z(int dim, std::mt19937_64& rng, double radius) {
  std::normal_distribution<double> g;
  Eigen::VectorXd z(dim);
  for (Eigen::Index i = 0; i < dim; ++i) z[i] = g(rng);
  return radius * z.normalized();
}

// The same R without the closed-form R~ and Hessian.
Nonlinearity generic_copy(const Nonlinearity& nl) {
  std::vector<Eigen::MatrixXd> s;
  for (int n = 0; n < nl.period(); ++n) s.push_back(nl.s_infinity(n));
  return Nonlinearity(
      nl.name() + "_generic", nl.block_dim(), nl.period(), [nl](int n, const VectorRef& z) { return nl.value(n, z); },
      [nl](int n, const VectorRef& z) { return nl.gradient(n, z); }, nullptr, s);
}

std::vector<Nonlinearity> families(int N) {
  return {family_radial_rational(4.0, N), family_log_saturating(5.0, N), family_quadratic(1.5, N)};
}

TEST(Families, GradientMatchesCentralDifferences) {
  std::mt19937_64 rng(2);
  for (int N : {1, 2}) {
    for (const auto& nl : families(N)) {
      for (double radius : {0.1, 1.0, 7.0}) {
        const Eigen::VectorXd z = random_z(2 * N, rng, radius);
        const Eigen::VectorXd g = nl.gradient(0, z);
        for (int i = 0; i < 2 * N; ++i) {
          const double h = 1e-5 * (1 + radius);
          Eigen::VectorXd zp = z, zm = z;
          zp[i] += h;
          zm[i] -= h;
          const double fd = (nl.value(0, zp) - nl.value(0, zm)) / (2 * h);
          EXPECT_NEAR(g[i], fd, 1e-7 * (1 + std::abs(g[i]))) << nl.name() << " r=" << radius;
        }
      }
    }
  }
}

TEST(Families, HessianMatchesDifferencedGradient) {
  std::mt19937_64 rng(3);
  for (const auto& nl : families(2)) {
    ASSERT_TRUE(nl.has_hessian());
    const auto generic = generic_copy(nl);
    for (double radius : {0.2, 1.0, 5.0}) {
      const Eigen::VectorXd z = random_z(4, rng, radius);
      const Eigen::MatrixXd H = nl.hessian(0, z);
      EXPECT_LE((H - H.transpose()).cwiseAbs().maxCoeff(), 1e-14);
      EXPECT_LE((H - generic.hessian(0, z)).cwiseAbs().maxCoeff(), 1e-6 * (1 + H.norm())) << nl.name();
    }
  }
}

TEST(Families, HandValuesAtUnitRadius) {
  Eigen::VectorXd z(2);
  z << 0.6, 0.8;
  const auto rr = family_radial_rational(4.0);
  EXPECT_NEAR(rr.value(0, z), 1.0, 1e-15);
  EXPECT_LE((rr.gradient(0, z) - 3.0 * z).norm(), 1e-15);
  EXPECT_NEAR(eval_tildeR(rr, 0, z), 0.5, 1e-15);

  const auto ls = family_log_saturating(4.0);
  EXPECT_NEAR(ls.value(0, z), 2.0 * (1.0 - std::log(2.0)), 1e-15);
  EXPECT_NEAR(ls.value(0, z), 0.61371, 1e-5);
  EXPECT_LE((ls.gradient(0, z) - 2.0 * z).norm(), 1e-15);
  EXPECT_NEAR(eval_tildeR(ls, 0, z), 0.38629, 1e-5);

  const auto q = family_quadratic(3.0);
  EXPECT_NEAR(q.value(0, z), 1.5, 1e-15);
  EXPECT_EQ(eval_tildeR(q, 0, z), 0.0);
  EXPECT_EQ(family_quadratic(0.0).value(0, z), 0.0);

  EXPECT_EQ(rr.value(0, Eigen::VectorXd::Zero(2)), 0.0);
  EXPECT_EQ(rr.gradient(0, Eigen::VectorXd::Zero(2)).norm(), 0.0);
}

TEST(Families, AsymptoticRemainderVanishes) {
  Eigen::VectorXd z(2);
  z << 600.0, 800.0;  // |z|^2 = 1e6
  const auto rr = family_radial_rational(4.0);
  // grad R - nu z = -nu z / (1 + |z|^2)^2; the subtraction costs ~3 digits here
  EXPECT_NEAR((rr.gradient(0, z) - 4.0 * z).norm() / z.norm(), 4.0 / std::pow(1.0 + 1e6, 2), 1e-3 * 4e-12);
  EXPECT_DOUBLE_EQ(rr.lambda_infinity(), 4.0);
  const auto ls = family_log_saturating(4.0);
  EXPECT_NEAR((ls.gradient(0, z) - 4.0 * z).norm() / z.norm(), 4.0 / (1.0 + 1e6), 1e-9 * 4e-6);
}

TEST(Families, ClosedFormTildeAgreesWithDefinition) {
  std::mt19937_64 rng(4);
  for (const auto& nl : families(2)) {
    ASSERT_TRUE(nl.has_tilde());
    const auto generic = generic_copy(nl);
    EXPECT_FALSE(generic.has_tilde());
    for (double radius : {1e-3, 0.3, 1.0, 4.0, 30.0}) {
      const Eigen::VectorXd z = random_z(4, rng, radius);
      const double t = eval_tildeR(nl, 0, z);
      EXPECT_NEAR(t, eval_tildeR(generic, 0, z), 1e-12 * (1 + nl.value(0, z))) << nl.name() << " r=" << radius;
      EXPECT_GE(t, 0.0);
    }
  }
  // Far out the closed form keeps its digits: R~ -> nu/2 for radial_rational.
  Eigen::VectorXd big(2);
  big << 3e7, 4e7;
  EXPECT_NEAR(eval_tildeR(family_radial_rational(4.0), 0, big), 2.0, 1e-12);
}

TEST(Families, NamesAndErrors) {
  EXPECT_EQ(make_family("log_saturating", 3.0, 2, 3).period(), 3);
  EXPECT_EQ(make_family("radial_rational", 3.0, 2, 1).block_dim(), 2);
  EXPECT_THROW(make_family("cubic", 1.0, 1, 1), ConfigurationError);
}

TEST(Checker, ModelPassesEverything) {
  const auto rep = check_hypotheses(family_radial_rational(4.0), test::model_matrices());
  ASSERT_EQ(rep.entries.size(), 5u);
  for (const auto& e : rep.entries) EXPECT_EQ(e.status, Status::Pass) << e.hypothesis << ": " << e.message;
  // With lambda0 = 1 the largest admissible delta is about 0.0335; the scan may
  // only underestimate it.
  EXPECT_GT(rep.delta0_estimate, 0.02);
  EXPECT_LE(rep.delta0_estimate, 0.0336);
  EXPECT_FALSE(rep.any_fail());
  EXPECT_FALSE(rep.any_inconclusive());
}

TEST(Checker, SmallNuFailsTheGap) {
  const auto rep = check_hypotheses(family_radial_rational(2.5), test::model_matrices());
  const auto& r3 = rep.entry("R3");
  EXPECT_EQ(r3.status, Status::Fail);
  ASSERT_TRUE(r3.witness.has_value());
  EXPECT_DOUBLE_EQ(r3.witness->measured, 2.5);
  EXPECT_NE(r3.message.find("2+Lambda0 = 3"), std::string::npos) << r3.message;
  for (const char* h : {"R0", "R1", "R2", "R4"}) EXPECT_NE(rep.entry(h).status, Status::Fail) << h;
}

TEST(Checker, QuadraticFailsSuperquadraticity) {
  const auto rep = check_hypotheses(family_quadratic(4.0), test::model_matrices());
  EXPECT_EQ(rep.entry("R2").status, Status::Fail);
  ASSERT_TRUE(rep.entry("R2").witness.has_value());
  EXPECT_EQ(rep.entry("R3").status, Status::Pass);
  EXPECT_TRUE(rep.any_fail());
}

TEST(Checker, NonPositiveDefiniteCoefficientsFailR0) {
  Eigen::MatrixXd s(2, 2);
  s << 0, 1, 1, 0;
  const auto rep = check_hypotheses(family_radial_rational(4.0), CoefficientMatrices{1, {s}});
  const auto& r0 = rep.entry("R0");
  EXPECT_EQ(r0.status, Status::Fail);
  ASSERT_TRUE(r0.witness.has_value());
  EXPECT_EQ(r0.witness->n, 0);
  EXPECT_DOUBLE_EQ(r0.witness->measured, -1.0);
}

TEST(Checker, NonPeriodicNonlinearityFailsR1) {
  auto base = family_radial_rational(4.0, 1, 2);
  Nonlinearity shifted(
      "drifting", 1, 2, [](int n, const VectorRef& z) { return (1.0 + 0.01 * n) * z.squaredNorm() * z.squaredNorm(); },
      [](int n, const VectorRef& z) -> Eigen::VectorXd { return (1.0 + 0.01 * n) * 4.0 * z.squaredNorm() * z; },
      nullptr, {base.s_infinity(0), base.s_infinity(1)});
  Eigen::MatrixXd s(2, 2);
  s << 0, -1, -1, 0;
  const auto rep = check_hypotheses(shifted, CoefficientMatrices{1, {s, s}});
  EXPECT_EQ(rep.entry("R1").status, Status::Fail);
}

TEST(Checker, DeterministicForAFixedSeed) {
  SamplingPlan plan;
  plan.seed = 17;
  const auto a = check_hypotheses(family_log_saturating(5.0), test::model_matrices(), plan);
  const auto b = check_hypotheses(family_log_saturating(5.0), test::model_matrices(), plan);
  ASSERT_EQ(a.entries.size(), b.entries.size());
  EXPECT_EQ(a.delta0_estimate, b.delta0_estimate);
  for (std::size_t i = 0; i < a.entries.size(); ++i) {
    EXPECT_EQ(a.entries[i].status, b.entries[i].status);
    EXPECT_EQ(a.entries[i].message, b.entries[i].message);
  }
}

TEST(GrowthEnvelope, BoundsTheGradientBetweenGridPoints) {
  const auto nl = family_radial_rational(4.0);
  const auto env = fit_growth_envelope(nl, SamplingPlan{}, 0.1, 4.0);
  EXPECT_TRUE(env.verified);
  EXPECT_GT(env.constant, 0.0);
  std::mt19937_64 rng(6);
  for (double r = 1e-3; r < 1e3; r *= 1.37) {
    const Eigen::VectorXd z = random_z(2, rng, r);
    EXPECT_LE(nl.gradient(0, z).norm(), 0.1 * r + env.constant * std::pow(r, 3.0)) << r;
  }
}

}  // namespace
}  // namespace dhs
