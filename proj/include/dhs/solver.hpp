#pragma once

// Newton iteration with backtracking for grad Phi = 0 on a truncated window,
// multi-start search for distinct homoclinic orbits, and natural-parameter
// continuation in a family parameter.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "dhs/functional.hpp"
#include "dhs/solve_options.hpp"
#include "dhs/verify.hpp"

namespace dhs {

enum class SolveStatus { Success, NotConverged, RejectedTrivial, VerificationFailed };
const char* to_string(SolveStatus s) noexcept;

struct SolveResult {
  SolveStatus status = SolveStatus::NotConverged;
  BlockVector orbit;
  double phi = 0.0;
  double grad_inf_norm = 0.0;
  int iterations = 0;
  std::string start;
  int regularizations = 0;      // Newton systems that needed a tau I shift
  int descent_steps = 0;        // steepest-descent fallback steps
  std::vector<double> residual_history;  // l2 norm of grad Phi per iterate
  std::optional<VerificationReport> verification;

  bool success() const noexcept { return status == SolveStatus::Success; }
};

/// Builds a start on ctx's window. LinkingDirection needs ctx.has_spectrum().
/// `stream` selects an independent random stream for Random starts.
BlockVector initial_guess(const StartSpec& spec, const FunctionalContext& ctx, std::uint64_t seed,
                          std::uint64_t stream = 0);

/// Eigenvector of A+S for the smallest positive eigenvalue outside the
/// truncation gap (-lambda0, lambda0), l2-normalized.
BlockVector linking_direction(const SpectralDecomposition& dec);

SolveResult newton_solve(const FunctionalContext& ctx, const BlockVector& x0, const SolveOptions& opts);

/// The 16 starts used when SolveOptions::starts is empty.
std::vector<StartSpec> default_starts();

/// l-infinity distance between a and b minimized over shifts by multiples of T.
double shift_aligned_distance(const BlockVector& a, const BlockVector& b, int period);

/// Runs every start, keeps verified orbits, drops duplicates (shift-aligned
/// distance < 1e-6) and sorts by Phi ascending.
std::vector<SolveResult> multi_start(const FunctionalContext& ctx, const SolveOptions& opts);

struct ContinuationStep {
  double parameter;
  SolveResult result;
};

struct ContinuationResult {
  std::vector<ContinuationStep> steps;  // verified steps only, in order
  bool completed = false;
  double last_good = 0.0;
  std::optional<ContinuationStep> failure;  // first step that did not verify
};

/// Solves at nu_from by multi_start (lowest Phi orbit), then walks
/// nu_k = nu_from (nu_to / nu_from)^{k/steps}, seeding each Newton solve with
/// the previous orbit. Stops at the first failure.
ContinuationResult continuation(const std::function<FunctionalContext(double)>& family, double nu_from,
                                double nu_to, int steps, const SolveOptions& opts);

}  // namespace dhs
