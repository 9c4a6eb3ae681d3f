#pragma once

#include <stdexcept>
#include <string>

namespace dhs {

/// Operand shapes disagree (windows, block dimensions, periods).
class DimensionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Argument outside the mathematical domain of an operation.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Inconsistent problem setup: bad window/period combination, missing data,
/// unknown names in a configuration.
class ConfigurationError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// One of the structural hypotheses (R0)-(R4) is violated by concrete data.
class HypothesisViolation : public std::runtime_error {
 public:
  HypothesisViolation(std::string hypothesis, int node, const std::string& what)
      : std::runtime_error(what), hypothesis_(std::move(hypothesis)), node_(node) {}

  const std::string& hypothesis() const noexcept { return hypothesis_; }
  int node() const noexcept { return node_; }

 private:
  std::string hypothesis_;
  int node_;
};

/// A numerical routine failed (eigensolver non-convergence, LAPACK error).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// An eigenvalue of A+S is numerically zero, so E+/E- are not separated.
class SpectralGapError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

}  // namespace dhs
