#pragma once

// JSON problem configurations, JSON reports, and the orbit / band CSV formats.

#include <nlohmann/json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "dhs/functional.hpp"
#include "dhs/nonlinearity.hpp"
#include "dhs/solver.hpp"
#include "dhs/spectral.hpp"

namespace dhs {

struct NonlinearityConfig {
  std::string family = "radial_rational";
  double parameter = 4.0;  // "nu" for radial_rational/log_saturating, "c" for quadratic

  friend bool operator==(const NonlinearityConfig&, const NonlinearityConfig&) = default;
};

struct WindowConfig {
  int half_width = 64;
  Boundary boundary = Boundary::ZeroPad;

  friend bool operator==(const WindowConfig&, const WindowConfig&) = default;
};

struct ProblemConfig {
  int block_dim = 1;
  int period = 1;
  std::vector<std::vector<double>> matrices;  // S(0..T-1), each (2N)^2 entries row-major
  NonlinearityConfig nonlinearity;
  WindowConfig window;
  SolveOptions solver;
  SamplingPlan check;
  std::string output_dir;  // empty: no files written

  CoefficientMatrices coefficient_matrices() const;
  Nonlinearity make_nonlinearity() const;
  /// Same config with another family parameter.
  ProblemConfig with_parameter(double parameter) const;
  Window make_window() const;
};

bool operator==(const ProblemConfig& a, const ProblemConfig& b);

/// Structural validation only: shapes, symmetry, ranges. (R0) is left to
/// check_hypotheses. Throws ConfigurationError naming the offending field.
ProblemConfig parse_config(const nlohmann::json& j);
ProblemConfig load_config(const std::string& path);
nlohmann::json to_json(const ProblemConfig& c);

nlohmann::json to_json(const HypothesisReport& r);
nlohmann::json to_json(const VerificationReport& r);
nlohmann::json to_json(const SolveResult& r);

/// Header n,x1_1..x1_N,x2_1..x2_N; 17 significant digits.
void write_orbit_csv(std::ostream& os, const BlockVector& x);
void write_orbit_csv(const std::string& path, const BlockVector& x);
/// Nodes must be consecutive; the result lives on [first, last] with `boundary`.
/// Throws DimensionError when the column count does not match N = block_dim.
BlockVector read_orbit_csv(std::istream& is, int block_dim, Boundary boundary = Boundary::ZeroPad);
BlockVector read_orbit_csv(const std::string& path, int block_dim, Boundary boundary = Boundary::ZeroPad);

/// Header theta,band_1..band_{2NT}.
void write_bands_csv(std::ostream& os, const std::vector<BandSample>& bands);

}  // namespace dhs
