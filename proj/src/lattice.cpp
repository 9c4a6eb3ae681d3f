#include "dhs/lattice.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "dhs/errors.hpp"
#include "dhs/kernels.hpp"
#include "dhs/operators.hpp"

namespace dhs {

Window Window::symmetric(int half_width, Boundary boundary) {
  if (half_width < 0) throw DomainError("window half_width must be nonnegative");
  return Window(-half_width, 2 * half_width + 1, boundary);
}

Window Window::cells(int count, Boundary boundary) {
  if (count < 1) throw DomainError("window node count must be positive");
  return Window(0, count, boundary);
}

std::optional<int> Window::resolve(int n) const noexcept {
  if (contains(n)) return n;
  if (boundary_ == Boundary::ZeroPad) return std::nullopt;
  const int rel = ((n - first_) % count_ + count_) % count_;
  return first_ + rel;
}

BlockVector::BlockVector(Window window, int block_dim)
    : window_(window), block_dim_(block_dim),
      data_(static_cast<std::size_t>(window.count()) * 2 * static_cast<std::size_t>(block_dim), 0.0) {
  if (block_dim < 1) throw DimensionError("block dimension N must be positive");
}

BlockVector::BlockVector(Window window, int block_dim, std::vector<double> data)
    : window_(window), block_dim_(block_dim), data_(std::move(data)) {
  if (block_dim < 1) throw DimensionError("block dimension N must be positive");
  const std::size_t expected = static_cast<std::size_t>(window.count()) * 2 * block_dim;
  if (data_.size() != expected) {
    std::ostringstream os;
    os << "block vector needs " << expected << " entries (" << window.count() << " nodes x "
       << 2 * block_dim << "), got " << data_.size();
    throw DimensionError(os.str());
  }
}

std::span<double> BlockVector::block(int n) {
  return std::span<double>(data_).subspan(window_.offset(n) * width(), width());
}

std::span<const double> BlockVector::block(int n) const {
  return std::span<const double>(data_).subspan(window_.offset(n) * width(), width());
}

namespace {

void require_same_shape(const BlockVector& a, const BlockVector& b, const char* op) {
  if (!a.same_shape(b)) {
    throw DimensionError(std::string(op) + ": operands live on different windows or block sizes");
  }
}

}  // namespace

BlockVector& BlockVector::operator+=(const BlockVector& rhs) {
  require_same_shape(*this, rhs, "operator+=");
  kernels::axpy(1.0, rhs.data_, data_);
  return *this;
}

BlockVector& BlockVector::operator-=(const BlockVector& rhs) {
  require_same_shape(*this, rhs, "operator-=");
  kernels::axpy(-1.0, rhs.data_, data_);
  return *this;
}

BlockVector& BlockVector::operator*=(double s) {
  for (double& v : data_) v *= s;
  return *this;
}

StructureMatrices StructureMatrices::make(int block_dim) {
  const int n = block_dim;
  StructureMatrices m;
  m.J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  m.J0 = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  const Eigen::MatrixXd id = Eigen::MatrixXd::Identity(n, n);
  m.J.topRightCorner(n, n) = -id;
  m.J.bottomLeftCorner(n, n) = id;
  m.J0.topRightCorner(n, n) = -id;
  m.J0.bottomLeftCorner(n, n) = -id;
  return m;
}

void CoefficientMatrices::validate() const {
  if (block_dim < 1) throw DimensionError("block dimension N must be positive");
  if (matrices.empty()) throw DimensionError("coefficient period T must be positive");
  for (std::size_t t = 0; t < matrices.size(); ++t) {
    const auto& s = matrices[t];
    if (s.rows() != 2 * block_dim || s.cols() != 2 * block_dim) {
      std::ostringstream os;
      os << "S(" << t << ") must be " << 2 * block_dim << "x" << 2 * block_dim << ", got " << s.rows()
         << "x" << s.cols();
      throw DimensionError(os.str());
    }
    const double asym = (s - s.transpose()).cwiseAbs().maxCoeff();
    if (!(asym <= kSymmetryTol)) {
      std::ostringstream os;
      os << "S(" << t << ") is not symmetric (max |S - S^T| = " << asym << ")";
      throw DomainError(os.str());
    }
  }
}

PeriodicCoefficients::PeriodicCoefficients(CoefficientMatrices data) : data_(std::move(data)) {
  data_.validate();
  const auto bounds = coercivity_bounds(data_);
  lambda0_ = bounds.lambda0;
  Lambda0_ = bounds.Lambda0;
}

double l2_inner(const BlockVector& x, const BlockVector& y) {
  require_same_shape(x, y, "l2_inner");
  return kernels::dot(x.data(), y.data());
}

std::vector<double> block_norms(const BlockVector& x) {
  std::vector<double> out(static_cast<std::size_t>(x.window().count()));
  kernels::block_sq_norms(x.data(), static_cast<std::size_t>(x.width()), out);
  for (double& v : out) v = std::sqrt(v);
  return out;
}

double lp_norm(const BlockVector& x, double p) {
  if (!(p >= 2.0)) throw DomainError("lp_norm requires p >= 2 (or p = infinity)");
  if (p == 2.0) return std::sqrt(kernels::sum_squares(x.data()));
  const auto norms = block_norms(x);
  if (std::isinf(p)) return norms.empty() ? 0.0 : *std::max_element(norms.begin(), norms.end());
  double s = 0.0;
  for (double v : norms) s += std::pow(v, p);
  return std::pow(s, 1.0 / p);
}

BlockVector shift(const BlockVector& x, int k) {
  const Window& w = x.window();
  BlockVector y(w, x.block_dim());
  for (int n = w.first(); n <= w.last(); ++n) {
    if (auto src = w.resolve(n + k)) {
      const auto from = x.block(*src);
      std::copy(from.begin(), from.end(), y.block(n).begin());
    }
  }
  return y;
}

BlockVector reembed(const BlockVector& x, const Window& target) {
  const Window& w = x.window();
  if (!target.contains(w.first()) || !target.contains(w.last())) {
    throw DomainError("reembed: target window does not contain the source window");
  }
  BlockVector y(target, x.block_dim());
  for (int n = w.first(); n <= w.last(); ++n) {
    const auto from = x.block(n);
    std::copy(from.begin(), from.end(), y.block(n).begin());
  }
  return y;
}

}  // namespace dhs
