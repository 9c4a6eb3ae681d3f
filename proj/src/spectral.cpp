#include "dhs/spectral.hpp"

#include <lapacke.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "dhs/errors.hpp"
#include "dhs/kernels.hpp"

namespace dhs {
namespace {

// Fix the sign ambiguity of each eigenvector: its largest-magnitude entry
// (first one on ties) is made positive.
void normalize_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index imax = 0;
    v.col(j).cwiseAbs().maxCoeff(&imax);
    if (v(imax, j) < 0.0) v.col(j) *= -1.0;
  }
}

// dsbev (implicit QL/QR) rather than dsbevd: the divide-and-conquer vectors
// from the OpenBLAS 0.3.20 LAPACK shipped here are wrong above ~200 unknowns.
void eigensolve_banded(const TruncatedOperator& op, Eigen::VectorXd& values, Eigen::MatrixXd& vectors) {
  const auto n = static_cast<lapack_int>(op.dim());
  const lapack_int kd = op.bandwidth();
  const lapack_int ldab = kd + 1;
  // Column-major upper band: ab(kd + i - j, j) = H(i, j).
  std::vector<double> ab(static_cast<std::size_t>(ldab) * n, 0.0);
  const auto& diags = op.diagonals();
  for (lapack_int k = 0; k <= kd; ++k) {
    for (std::size_t i = 0; i < diags[k].size(); ++i) {
      const auto j = static_cast<lapack_int>(i) + k;
      ab[static_cast<std::size_t>(j) * ldab + (kd - k)] = diags[k][i];
    }
  }
  values.resize(n);
  vectors.resize(n, n);
  const lapack_int info =
      LAPACKE_dsbev(LAPACK_COL_MAJOR, 'V', 'U', n, kd, ab.data(), ldab, values.data(), vectors.data(), n);
  if (info != 0) {
    std::ostringstream os;
    os << "banded eigensolver (dsbev) failed, info=" << info << " for dimension " << n;
    throw NumericalError(os.str());
  }
}

void check_gap(const SpectralDecomposition& dec) {
  for (Eigen::Index i = 0; i < dec.size(); ++i) {
    if (std::abs(dec.eigenvalues[i]) < kZeroEigenvalueTol) {
      std::ostringstream os;
      os << "eigenvalue " << dec.eigenvalues[i] << " (index " << i
         << ") is numerically zero; E+ and E- are not separated";
      throw SpectralGapError(os.str());
    }
  }
}

void require_compatible(const SpectralDecomposition& dec, const BlockVector& x) {
  if (x.window() != dec.window || x.block_dim() != dec.block_dim) {
    throw DimensionError("vector does not live on the decomposition's window");
  }
}

}  // namespace

Eigen::VectorXd SpectralDecomposition::coordinates(const BlockVector& x) const {
  require_compatible(*this, x);
  return eigenvectors.transpose() * x.vec();
}

BlockVector SpectralDecomposition::eigenvector(Eigen::Index i) const {
  BlockVector v(window, block_dim);
  v.vec() = eigenvectors.col(i);
  return v;
}

SpectralDecomposition eigendecompose(const TruncatedOperator& op) {
  SpectralDecomposition dec{op.window(), op.block_dim(), {}, {}, 0, op.coeffs().lambda0(),
                            op.coeffs().Lambda0()};
  if (op.storage() == Storage::Dense) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.dense());
    if (es.info() != Eigen::Success) {
      std::ostringstream os;
      os << "dense eigensolver did not converge for dimension " << op.dim();
      throw NumericalError(os.str());
    }
    dec.eigenvalues = es.eigenvalues();
    dec.eigenvectors = es.eigenvectors();
  } else {
    eigensolve_banded(op, dec.eigenvalues, dec.eigenvectors);
  }
  normalize_signs(dec.eigenvectors);
  const auto* begin = dec.eigenvalues.data();
  dec.split_index = std::upper_bound(begin, begin + dec.eigenvalues.size(), 0.0) - begin;
  return dec;
}

SplitVector projectors(const SpectralDecomposition& dec, const BlockVector& x) {
  require_compatible(dec, x);
  check_gap(dec);
  const Eigen::Index k = dec.split_index;
  const auto vminus = dec.eigenvectors.leftCols(k);
  SplitVector out{BlockVector(dec.window, dec.block_dim), x};
  out.minus.vec().noalias() = vminus * (vminus.transpose() * x.vec());
  out.plus -= out.minus;
  return out;
}

double e_norm(const SpectralDecomposition& dec, const BlockVector& x) {
  check_gap(dec);
  const Eigen::VectorXd c = dec.coordinates(x);
  const Eigen::VectorXd w = dec.eigenvalues.cwiseAbs();
  return std::sqrt(kernels::weighted_sum_squares({w.data(), static_cast<std::size_t>(w.size())},
                                                 {c.data(), static_cast<std::size_t>(c.size())}));
}

std::vector<BandSample> band_structure(const PeriodicCoefficients& coeffs, int grid_size) {
  if (grid_size < 2) throw DomainError("band_structure requires grid_size >= 2");
  std::vector<BandSample> out;
  out.reserve(static_cast<std::size_t>(grid_size));
  for (int j = 0; j < grid_size; ++j) {
    const double theta = 2.0 * std::numbers::pi * j / grid_size;
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(floquet_symbol(theta, coeffs), Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success) throw NumericalError("symbol eigensolver did not converge");
    out.push_back({theta, es.eigenvalues()});
  }
  return out;
}

std::vector<GapMode> gap_mode_report(const SpectralDecomposition& dec, double tol, int boundary_layer) {
  std::vector<GapMode> out;
  const int width = 2 * dec.block_dim;
  const int count = dec.window.count();
  for (Eigen::Index i = 0; i < dec.size(); ++i) {
    const double lam = dec.eigenvalues[i];
    if (!(lam > -dec.lambda0 + tol && lam < dec.lambda0 - tol)) continue;
    double edge = 0.0;
    double total = 0.0;
    for (int node = 0; node < count; ++node) {
      const double m = dec.eigenvectors.col(i).segment(static_cast<Eigen::Index>(node) * width, width).squaredNorm();
      total += m;
      if (node < boundary_layer || node >= count - boundary_layer) edge += m;
    }
    out.push_back({i, lam, total > 0.0 ? edge / total : 0.0});
  }
  return out;
}

InclusionCheck spectral_inclusion(std::span<const double> values, double lambda0, double Lambda0, double tol) {
  double worst = 0.0;
  const double outer = Lambda0 + 2.0;
  for (double v : values) {
    const double a = std::abs(v);
    double d = 0.0;
    if (a < lambda0) d = lambda0 - a;
    if (a > outer) d = a - outer;
    worst = std::max(worst, d);
  }
  return {worst <= tol, worst};
}

}  // namespace dhs
