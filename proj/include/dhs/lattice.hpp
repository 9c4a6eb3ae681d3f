#pragma once

// Finite windows of the lattice Z, block sequences x(n) in R^{2N}, the
// coefficient data S(n), and the l^2 / l^p geometry on them.

#include <Eigen/Dense>

#include <cstddef>
#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace dhs {

enum class Boundary { ZeroPad, Periodic };

/// A contiguous range of lattice nodes with a rule for indices outside it.
///
/// Symmetric windows [-M, M] are the normal case. Periodic spectral checks
/// also need windows holding an exact number of period cells, which may be an
/// even node count; `cells` builds those on [0, count).
class Window {
 public:
  static Window symmetric(int half_width, Boundary boundary = Boundary::ZeroPad);
  static Window cells(int count, Boundary boundary = Boundary::Periodic);

  int first() const noexcept { return first_; }
  int last() const noexcept { return first_ + count_ - 1; }
  int count() const noexcept { return count_; }
  Boundary boundary() const noexcept { return boundary_; }

  bool is_symmetric() const noexcept { return first_ == -(count_ - 1) / 2 && count_ % 2 == 1; }
  /// M for a symmetric window; for other windows the distance from the
  /// center to the edge, rounded down.
  int half_width() const noexcept { return (count_ - 1) / 2; }

  bool contains(int n) const noexcept { return n >= first_ && n <= last(); }
  std::size_t offset(int n) const noexcept { return static_cast<std::size_t>(n - first_); }

  /// Node that a reference to x(n) resolves to: n itself inside the window,
  /// the wrapped node under Periodic, nothing (a zero block) under ZeroPad.
  std::optional<int> resolve(int n) const noexcept;

  Window with_boundary(Boundary b) const { return Window(first_, count_, b); }

  friend bool operator==(const Window&, const Window&) = default;

 private:
  Window(int first, int count, Boundary boundary) : first_(first), count_(count), boundary_(boundary) {}

  int first_;
  int count_;
  Boundary boundary_;
};

/// x(n) = (x1(n), x2(n)) in R^N x R^N for every node of a window, stored
/// node-major with x1 components before x2 components inside a node.
class BlockVector {
 public:
  /// The zero vector on the single node {0} with N = 1.
  BlockVector() : BlockVector(Window::symmetric(0), 1) {}
  BlockVector(Window window, int block_dim);
  BlockVector(Window window, int block_dim, std::vector<double> data);

  const Window& window() const noexcept { return window_; }
  int block_dim() const noexcept { return block_dim_; }
  int width() const noexcept { return 2 * block_dim_; }
  std::size_t size() const noexcept { return data_.size(); }

  std::span<double> block(int n);
  std::span<const double> block(int n) const;
  std::span<double> x1(int n) { return block(n).first(block_dim_); }
  std::span<double> x2(int n) { return block(n).last(block_dim_); }
  std::span<const double> x1(int n) const { return block(n).first(block_dim_); }
  std::span<const double> x2(int n) const { return block(n).last(block_dim_); }

  std::span<double> data() noexcept { return data_; }
  std::span<const double> data() const noexcept { return data_; }

  Eigen::Map<Eigen::VectorXd> vec() { return {data_.data(), static_cast<Eigen::Index>(data_.size())}; }
  Eigen::Map<const Eigen::VectorXd> vec() const {
    return {data_.data(), static_cast<Eigen::Index>(data_.size())};
  }

  bool same_shape(const BlockVector& other) const noexcept {
    return window_ == other.window_ && block_dim_ == other.block_dim_;
  }

  BlockVector& operator+=(const BlockVector& rhs);
  BlockVector& operator-=(const BlockVector& rhs);
  BlockVector& operator*=(double s);
  friend BlockVector operator+(BlockVector a, const BlockVector& b) { return a += b; }
  friend BlockVector operator-(BlockVector a, const BlockVector& b) { return a -= b; }
  friend BlockVector operator*(double s, BlockVector a) { return a *= s; }

  friend bool operator==(const BlockVector&, const BlockVector&) = default;

 private:
  Window window_;
  int block_dim_;
  std::vector<double> data_;
};

/// J = [[0, -I], [I, 0]] and J0 = [[0, -I], [-I, 0]] for block size N.
struct StructureMatrices {
  Eigen::MatrixXd J;
  Eigen::MatrixXd J0;

  static StructureMatrices make(int block_dim);
};

/// Raw S(0..T-1): symmetric 2N x 2N matrices, no sign hypothesis imposed.
struct CoefficientMatrices {
  int block_dim = 1;
  std::vector<Eigen::MatrixXd> matrices;

  int period() const noexcept { return static_cast<int>(matrices.size()); }
  /// Throws DimensionError / DomainError on shape or symmetry violations.
  void validate() const;
};

/// Coefficient index of node n: ((n mod T) + T) mod T, so n = 0 uses S(0).
inline int coefficient_index(int n, int period) noexcept { return ((n % period) + period) % period; }

/// S(n) with S(n+T) = S(n), accepted only when J0 S(n) is symmetric positive
/// definite for every n; lambda0/Lambda0 are the extreme eigenvalues of J0 S.
class PeriodicCoefficients {
 public:
  explicit PeriodicCoefficients(CoefficientMatrices data);

  int block_dim() const noexcept { return data_.block_dim; }
  int period() const noexcept { return data_.period(); }
  double lambda0() const noexcept { return lambda0_; }
  double Lambda0() const noexcept { return Lambda0_; }

  const Eigen::MatrixXd& at(int n) const { return data_.matrices[coefficient_index(n, period())]; }
  const CoefficientMatrices& raw() const noexcept { return data_; }

 private:
  CoefficientMatrices data_;
  double lambda0_;
  double Lambda0_;
};

inline constexpr double kSymmetryTol = 1e-12;
inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

double l2_inner(const BlockVector& x, const BlockVector& y);
/// l^p norm over nodes of the Euclidean block norms |x(n)|; p in [2, inf].
double lp_norm(const BlockVector& x, double p);
inline double l2_norm(const BlockVector& x) { return lp_norm(x, 2.0); }
inline double linf_norm(const BlockVector& x) { return lp_norm(x, kInfinity); }
/// Per-node Euclidean norms |x(n)|, in window order.
std::vector<double> block_norms(const BlockVector& x);

/// y(n) = x(n + k) under the window's boundary rule.
BlockVector shift(const BlockVector& x, int k);
/// Zero-padded copy on a window containing x's window.
BlockVector reembed(const BlockVector& x, const Window& target);

}  // namespace dhs
