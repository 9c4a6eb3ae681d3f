#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "dhs/lattice.hpp"

namespace dhs {

enum class StartStrategy { LinkingDirection, GaussianBump, Random, Explicit };

const char* to_string(StartStrategy s) noexcept;
/// "linking_direction", "gaussian_bump", "random", "explicit";
/// throws ConfigurationError otherwise.
StartStrategy parse_strategy(const std::string& name);

struct StartSpec {
  StartStrategy strategy = StartStrategy::LinkingDirection;
  /// l2 norm of the start, except GaussianBump where it is the peak block norm.
  double amplitude = 1.0;
  /// GaussianBump width in nodes; unset means half_width / 8.
  std::optional<double> width;
  /// Explicit start; reembedded onto the solve window.
  std::optional<BlockVector> vector;

  std::string tag() const;
};

/// Thresholds a converged point has to meet to count as a homoclinic orbit.
struct VerifyTolerances {
  double dhs_residual = 1e-9;
  double decay_rate_max = 1.0;  // strict
  double decay_r_squared_min = 0.99;
  double energy_identity = 1e-8;
  double window_stability = 1e-8;
  double tail_fraction = 0.25;
};

struct SolveOptions {
  int max_iter = 200;
  double grad_tol = 1e-10;   // on the l-infinity block norm of grad Phi
  double trivial_tol = 1e-6;  // converged points with l-infinity norm below this are rejected
  double backtrack_shrink = 0.5;
  double sufficient_decrease = 1e-4;
  double min_step = 1e-12;
  double regularization = 1e-8;  // first shift tau of a singular Newton matrix
  int max_regularizations = 30;
  /// Starts for multi_start; empty means default_starts().
  std::vector<StartSpec> starts;
  std::uint64_t seed = 0;
  bool verify = true;
  bool window_doubling = true;
  int threads = 1;
  VerifyTolerances tolerances;
};

}  // namespace dhs
