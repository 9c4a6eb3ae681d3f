#include "dhs/operators.hpp"

#include <algorithm>
#include <complex>
#include <sstream>

#include "dhs/errors.hpp"
#include "dhs/kernels.hpp"

namespace dhs {
namespace {

// (Ax)(n) for one node, given a lookup that returns the block at a node or
// nullptr for a zero block. Shared by the real operator and the Bloch symbol.
template <class Scalar, class Lookup>
void a_stencil(int n, int N, const Lookup& at, Scalar* out) {
  const Scalar* here = at(n);
  const Scalar* prev = at(n - 1);
  const Scalar* next = at(n + 1);
  for (int j = 0; j < N; ++j) {
    Scalar z1 = here ? here[N + j] : Scalar(0);
    if (prev) z1 -= prev[N + j];
    Scalar z2 = here ? here[j] : Scalar(0);
    if (next) z2 -= next[j];
    out[j] = z1;
    out[N + j] = z2;
  }
}

// Calls f(row, col, value) for every contribution to the matrix of A+S.
template <class F>
void for_each_entry(const Window& w, const PeriodicCoefficients& coeffs, F&& f) {
  const int N = coeffs.block_dim();
  const int width = 2 * N;
  for (int n = w.first(); n <= w.last(); ++n) {
    const auto base = static_cast<Eigen::Index>(w.offset(n)) * width;
    for (int j = 0; j < N; ++j) {
      f(base + j, base + N + j, 1.0);
      f(base + N + j, base + j, 1.0);
      if (auto p = w.resolve(n - 1)) f(base + j, static_cast<Eigen::Index>(w.offset(*p)) * width + N + j, -1.0);
      if (auto q = w.resolve(n + 1)) f(base + N + j, static_cast<Eigen::Index>(w.offset(*q)) * width + j, -1.0);
    }
    const auto& s = coeffs.at(n);
    for (int r = 0; r < width; ++r)
      for (int c = 0; c < width; ++c) f(base + r, base + c, -s(r, c));
  }
}

}  // namespace

BlockVector apply_A(const BlockVector& x) {
  const Window& w = x.window();
  const int N = x.block_dim();
  BlockVector z(w, N);
  auto lookup = [&](int m) -> const double* {
    auto r = w.resolve(m);
    return r ? x.block(*r).data() : nullptr;
  };
  for (int n = w.first(); n <= w.last(); ++n) a_stencil<double>(n, N, lookup, z.block(n).data());
  return z;
}

BlockVector apply_S(const BlockVector& x, const PeriodicCoefficients& coeffs) {
  if (x.block_dim() != coeffs.block_dim()) {
    throw DimensionError("apply_S: vector block size N differs from coefficient block size");
  }
  const Window& w = x.window();
  const int width = x.width();
  BlockVector z(w, x.block_dim());
  for (int n = w.first(); n <= w.last(); ++n) {
    Eigen::Map<const Eigen::VectorXd> xn(x.block(n).data(), width);
    Eigen::Map<Eigen::VectorXd> zn(z.block(n).data(), width);
    zn.noalias() = -coeffs.at(n) * xn;
  }
  return z;
}

CoercivityBounds coercivity_bounds(const CoefficientMatrices& coeffs) {
  coeffs.validate();
  const auto J0 = StructureMatrices::make(coeffs.block_dim).J0;
  double lo = kInfinity;
  double hi = -kInfinity;
  for (int t = 0; t < coeffs.period(); ++t) {
    const Eigen::MatrixXd k = J0 * coeffs.matrices[t];
    const double asym = (k - k.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymmetryTol)) {
      std::ostringstream os;
      os << "(R0) violated at n=" << t << ": J0 S(n) is not symmetric (max asymmetry " << asym << ")";
      throw HypothesisViolation("R0", t, os.str());
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(0.5 * (k + k.transpose()), Eigen::EigenvaluesOnly);
    const double emin = es.eigenvalues().minCoeff();
    const double emax = es.eigenvalues().maxCoeff();
    if (!(emin > kSymmetryTol)) {
      std::ostringstream os;
      os << "(R0) violated at n=" << t << ": J0 S(n) is not positive definite (min eigenvalue " << emin
         << ")";
      throw HypothesisViolation("R0", t, os.str());
    }
    lo = std::min(lo, emin);
    hi = std::max(hi, emax);
  }
  return {lo, hi};
}

TruncatedOperator::TruncatedOperator(Window window, PeriodicCoefficients coeffs, Storage storage)
    : window_(window), coeffs_(std::move(coeffs)), storage_(storage),
      dim_(static_cast<Eigen::Index>(window.count()) * 2 * coeffs_.block_dim()) {
  if (window_.boundary() == Boundary::Periodic) {
    if (window_.count() % coeffs_.period() != 0) {
      std::ostringstream os;
      os << "periodic window has " << window_.count() << " nodes, not a multiple of the period T="
         << coeffs_.period();
      throw ConfigurationError(os.str());
    }
    if (storage_ == Storage::Banded) {
      throw ConfigurationError("banded storage is unavailable for periodic windows");
    }
  }
  if (storage_ == Storage::Dense) {
    dense_ = Eigen::MatrixXd::Zero(dim_, dim_);
    for_each_entry(window_, coeffs_, [&](Eigen::Index r, Eigen::Index c, double v) { dense_(r, c) += v; });
  } else {
    diagonals_.resize(static_cast<std::size_t>(bandwidth()) + 1);
    for (int k = 0; k <= bandwidth(); ++k) diagonals_[k].assign(static_cast<std::size_t>(dim_ - k), 0.0);
    for_each_entry(window_, coeffs_, [&](Eigen::Index r, Eigen::Index c, double v) {
      if (c >= r) diagonals_[static_cast<std::size_t>(c - r)][static_cast<std::size_t>(r)] += v;
    });
  }
}

void TruncatedOperator::apply(std::span<const double> x, std::span<double> y) const {
  if (static_cast<Eigen::Index>(x.size()) != dim_ || static_cast<Eigen::Index>(y.size()) != dim_) {
    throw DimensionError("TruncatedOperator::apply: vector length differs from operator dimension");
  }
  if (storage_ == Storage::Dense) {
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim_);
    Eigen::Map<Eigen::VectorXd> yv(y.data(), dim_);
    yv.noalias() = dense_ * xv;
    return;
  }
  std::fill(y.begin(), y.end(), 0.0);
  kernels::diag_multiply_add(diagonals_[0], x, y);
  for (std::size_t k = 1; k < diagonals_.size(); ++k) {
    const auto& d = diagonals_[k];
    const std::size_t len = d.size();
    kernels::diag_multiply_add(d, x.subspan(k, len), y.first(len));
    kernels::diag_multiply_add(d, x.first(len), y.subspan(k, len));
  }
}

BlockVector TruncatedOperator::apply(const BlockVector& x) const {
  if (x.window() != window_ || x.block_dim() != block_dim()) {
    throw DimensionError("TruncatedOperator::apply: vector does not live on the operator's window");
  }
  BlockVector y(window_, block_dim());
  apply(x.data(), y.data());
  return y;
}

Eigen::MatrixXd TruncatedOperator::dense() const {
  if (storage_ == Storage::Dense) return dense_;
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(dim_, dim_);
  for (std::size_t k = 0; k < diagonals_.size(); ++k) {
    for (std::size_t i = 0; i < diagonals_[k].size(); ++i) {
      const auto r = static_cast<Eigen::Index>(i);
      const auto c = static_cast<Eigen::Index>(i + k);
      m(r, c) = diagonals_[k][i];
      m(c, r) = diagonals_[k][i];
    }
  }
  return m;
}

TruncatedOperator assemble(const Window& window, const PeriodicCoefficients& coeffs,
                           std::optional<Storage> storage) {
  Storage s = Storage::Dense;
  if (storage) {
    s = *storage;
  } else if (window.boundary() == Boundary::ZeroPad && window.count() > kBandedNodeThreshold) {
    s = Storage::Banded;
  }
  return TruncatedOperator(window, coeffs, s);
}

Eigen::MatrixXcd floquet_symbol(double theta, const PeriodicCoefficients& coeffs) {
  using cd = std::complex<double>;
  const int N = coeffs.block_dim();
  const int T = coeffs.period();
  const int width = 2 * N;
  const int dim = width * T;
  Eigen::MatrixXcd m(dim, dim);

  // Column (s, c): the Bloch sequence x(s + qT) = e^{i theta q} e_c.
  std::vector<cd> scratch(static_cast<std::size_t>(3 * width));
  std::vector<cd> out(static_cast<std::size_t>(width));
  for (int s = 0; s < T; ++s) {
    for (int c = 0; c < width; ++c) {
      for (int n = 0; n < T; ++n) {
        // Only nodes n-1, n, n+1 are consulted; cache their blocks.
        auto fill = [&](int slot, int node) -> const cd* {
          const int rel = node - s;
          if (((rel % T) + T) % T != 0) return nullptr;
          const int q = (rel >= 0) ? rel / T : -((-rel) / T);
          cd* blk = scratch.data() + static_cast<std::ptrdiff_t>(slot) * width;
          std::fill(blk, blk + width, cd(0.0));
          blk[c] = std::polar(1.0, theta * q);
          return blk;
        };
        const cd* blocks[3] = {fill(0, n - 1), fill(1, n), fill(2, n + 1)};
        auto lookup = [&](int node) -> const cd* { return blocks[node - n + 1]; };
        a_stencil<cd>(n, N, lookup, out.data());
        if (blocks[1]) {
          const auto& sm = coeffs.at(n);
          for (int r = 0; r < width; ++r) out[r] -= sm(r, c) * blocks[1][c];
        }
        for (int r = 0; r < width; ++r) m(n * width + r, s * width + c) = out[r];
      }
    }
  }
  return m;
}

}  // namespace dhs
