#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <random>
#include <string>

#include "dhs/config.hpp"
#include "dhs/functional.hpp"
#include "dhs/lattice.hpp"
#include "dhs/nonlinearity.hpp"

namespace dhs::test {

inline std::string config_path(const std::string& name) { return std::string(DHS_CONFIG_DIR) + "/" + name; }

inline CoefficientMatrices model_matrices() {
  Eigen::MatrixXd s(2, 2);
  s << 0, -1, -1, 0;
  return {1, {s}};
}

inline PeriodicCoefficients model_coeffs() { return PeriodicCoefficients(model_matrices()); }

inline BlockVector random_vector(const Window& w, int N, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  BlockVector x(w, N);
  for (double& v : x.data()) v = g(rng);
  return x;
}

inline Eigen::MatrixXd random_spd(int n, std::mt19937_64& rng, double shift) {
  std::normal_distribution<double> g;
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) a(i, j) = g(rng) / std::sqrt(n);
  return a * a.transpose() + shift * Eigen::MatrixXd::Identity(n, n);
}

/// Random S(n) satisfying (R0), built from its own spectral data: with
/// S = [[P, Q], [Q, P]] and J0 = [[0, -I], [-I, 0]] the eigenvalues of J0 S are
/// those of -(Q + P) and -(Q - P), which we pick as SPD matrices U and V.
struct RandomCoefficients {
  CoefficientMatrices matrices;
  double lambda0;  // independent oracle
  double Lambda0;
};

inline RandomCoefficients random_coefficients(int N, int T, std::mt19937_64& rng) {
  RandomCoefficients out{{N, {}}, 1e300, -1e300};
  for (int t = 0; t < T; ++t) {
    const Eigen::MatrixXd U = random_spd(N, rng, 0.3);
    const Eigen::MatrixXd V = random_spd(N, rng, 0.3);
    const Eigen::MatrixXd Q = -0.5 * (U + V);
    const Eigen::MatrixXd P = 0.5 * (V - U);
    Eigen::MatrixXd S(2 * N, 2 * N);
    S << P, Q, Q, P;
    out.matrices.matrices.push_back(S);
    for (const Eigen::MatrixXd* m : {&U, &V}) {
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(*m);
      out.lambda0 = std::min(out.lambda0, es.eigenvalues().minCoeff());
      out.Lambda0 = std::max(out.Lambda0, es.eigenvalues().maxCoeff());
    }
  }
  return out;
}

/// ((A+S)x)(n) for a sequence given on all of Z by `x(n)`, straight from the
/// stencil; used to manufacture exact solutions.
template <class Seq>
Eigen::VectorXd operator_on_Z(const Seq& x, int n, const PeriodicCoefficients& c) {
  const int N = c.block_dim();
  const Eigen::VectorXd xn = x(n);
  const Eigen::VectorXd xp = x(n + 1);
  const Eigen::VectorXd xm = x(n - 1);
  Eigen::VectorXd z(2 * N);
  z.head(N) = xn.tail(N) - xm.tail(N);
  z.tail(N) = xn.head(N) - xp.head(N);
  return z - c.at(n) * xn;
}

/// Exact critical point on Z: x*(n) = rho^{|n|} v solves grad Phi = 0 for
/// R^(n, z) = b(n).z + (k/2)|z|^2 with b(n) = ((A+S)x*)(n) - k x*(n).
struct Manufactured {
  PeriodicCoefficients coeffs;
  double rho;
  double k;
  Eigen::VectorXd v;

  Eigen::VectorXd exact(int n) const { return std::pow(rho, std::abs(n)) * v; }
  Eigen::VectorXd b(int n) const {
    return operator_on_Z([this](int m) { return exact(m); }, n, coeffs) - k * exact(n);
  }

  Nonlinearity nonlinearity() const {
    const Manufactured self = *this;
    const int N = coeffs.block_dim();
    const int T = coeffs.period();
    auto value = [self](int n, const VectorRef& z) { return self.b(n).dot(z) + 0.5 * self.k * z.squaredNorm(); };
    auto gradient = [self](int n, const VectorRef& z) -> Eigen::VectorXd { return self.b(n) + self.k * z; };
    auto hessian = [self, N](int, const VectorRef&) -> Eigen::MatrixXd {
      return self.k * Eigen::MatrixXd::Identity(2 * N, 2 * N);
    };
    return Nonlinearity("manufactured", N, T, value, gradient, hessian,
                        std::vector<Eigen::MatrixXd>(static_cast<std::size_t>(T),
                                                     self.k * Eigen::MatrixXd::Identity(2 * N, 2 * N)));
  }

  BlockVector on(const Window& w) const {
    BlockVector x(w, coeffs.block_dim());
    for (int n = w.first(); n <= w.last(); ++n) {
      const Eigen::VectorXd e = exact(n);
      auto blk = x.block(n);
      for (std::size_t i = 0; i < blk.size(); ++i) blk[i] = e[static_cast<Eigen::Index>(i)];
    }
    return x;
  }
};

inline Manufactured manufactured_model() {
  Eigen::VectorXd v(2);
  v << 0.6, 0.8;
  return {model_coeffs(), 0.5, 0.5, v};
}

}  // namespace dhs::test
