#pragma once

#include <string>
#include <vector>

#include "swocp/transcription.hpp"

namespace swocp {

enum class InnerMethod {
  /// Trust-region Newton on the exact sparse Hessian of the augmented
  /// Lagrangian; each step minimizes the quadratic model over the box.
  kProjectedNewton,
  kLbfgs,  // projected limited-memory BFGS, memory 10
};

struct SolveOptions {
  int max_outer_iters = 30;
  int max_inner_iters = 500;
  double constraint_tol = 1e-6;
  double optimality_tol = 1e-6;
  double initial_penalty = 10.0;
  double penalty_growth = 10.0;
  /// Reserved for randomized restarts; the current solver is fully
  /// deterministic and does not draw random numbers.
  unsigned seed = 0;
  InnerMethod inner_method = InnerMethod::kProjectedNewton;

  void validate() const;
};

enum class SolveStatus { kConverged, kMaxIters, kFailed };

std::string to_string(SolveStatus status);

struct SolveResult {
  Vector z_opt;
  double objective_value = 0.0;
  double constraint_violation = 0.0;  // max-norm of the equality residual
  double projected_gradient_norm = 0.0;
  Vector multipliers;  // sign convention: Lagrangian = f + multipliers . c
  SolveStatus status = SolveStatus::kFailed;
  int iterations = 0;        // inner iterations, summed over outer iterations
  int outer_iterations = 0;
  int function_evals = 0;
  std::vector<double> violation_history;  // one entry per outer iteration
  std::vector<double> penalty_history;
  std::string message;
};

/// Augmented Lagrangian outer loop around a bound-constrained inner solver.
/// Equality constraints enter through the multiplier update
/// lambda <- lambda + rho * c(z); rho grows by penalty_growth whenever the
/// violation fails to drop below a quarter of its previous value. The loop
/// stops early, with status max-iters, after five outer iterations without a
/// 1% drop in violation.
SolveResult solve(const NlpProblem& nlp, const Vector& z0, const SolveOptions& options = {});

/// Infinity norm of P(z - g) - z for the box of `nlp`.
double projected_gradient_norm(const NlpProblem& nlp, const Vector& z, const Vector& g);

}  // namespace swocp
