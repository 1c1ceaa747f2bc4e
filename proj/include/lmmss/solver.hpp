#pragma once

#include "lmmss/linalg.hpp"
#include "lmmss/problem.hpp"

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmmss {

enum class SolveMode { pure, globalized, classic_lm };
enum class DirectionKind { scaled, safeguard_lm };
enum class SolveStatus { converged, max_iters, linesearch_failure, numerical_error };

std::string_view to_string(SolveMode mode);
std::string_view to_string(DirectionKind kind);
std::string_view to_string(SolveStatus status);
std::optional<SolveMode> parse_solve_mode(std::string_view text);

/// lambda is never allowed below this, so the augmented system stays regular
/// at points where the stopping test has not fired yet.
inline constexpr double kLambdaFloor = 1e-300;

struct SolverConfig {
  double nu = 1e-4;             // Armijo slope fraction
  double zeta = 0.5;            // backtracking factor
  double vartheta = 0.9;        // full step accepted if ||grad(x+d)|| <= vartheta ||grad(x)||
  double theta = 1e-6;          // angle test -grad^T d >= theta ||grad||^2
  double m_cap = 1e6;          // norm cap on the scaled direction
  double lambda_exponent = 1.0; // lambda_k = ||grad_k||^r
  double grad_tol = 1e-8;
  int max_iters = 200;
  int max_backtracks = 60;
  SolveMode mode = SolveMode::globalized;
  /// Replace poor scaled directions by the classic LM direction. Turning it
  /// off exposes the stall near points where completeness fails.
  bool safeguard = true;

  /// Throws InvalidConfig when a parameter leaves its admissible range.
  void validate() const;
};

struct IterateRecord {
  int k = 0;
  Vector x;
  double phi = 0.0;
  double grad_norm = 0.0;
  double lambda = 0.0;

  // Step taken from x; absent on the final record of a run.
  bool has_step = false;
  Vector direction;
  DirectionKind dir_kind = DirectionKind::scaled;
  double alpha = 0.0;
  bool full_step_accepted = false;
  int backtracks = 0;

  std::optional<double> dist;
  std::optional<double> surrogate_dist;

  double step_norm() const { return has_step ? alpha * direction.norm() : 0.0; }
};

struct SolveTrace {
  std::vector<IterateRecord> records;
  SolveStatus status = SolveStatus::numerical_error;
  Vector final_x;
  std::string message;
  /// False when the run left the region the distance oracle describes.
  bool dist_applicable = false;

  /// Number of steps taken.
  int iterations() const;
  /// Strict decrease of phi over every step; reported, never enforced.
  bool phi_strictly_decreasing() const;
};

struct StepResult {
  Vector x_next;
  IterateRecord record;
};

/// One unit step x + d with d the scaled direction for lambda = ||J^T F||^r.
/// Throws StationaryInput when ||J^T F|| <= grad_tol and
/// CompletenessViolation when the regularized system is numerically singular.
StepResult pure_step(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x,
                     double r, double grad_tol = 0.0);

struct ArmijoResult {
  int backtracks = 0;
  double alpha = 1.0;
};

/// Smallest m <= max_backtracks with phi(x + zeta^m d) - phi(x) <= nu zeta^m grad^T d.
/// Throws NotDescent if grad^T d >= 0 and LinesearchFailure if no m qualifies.
ArmijoResult armijo_backtrack(const NlsProblem& problem, const Vector& x, const Vector& d,
                              double nu, double zeta, int max_backtracks);

/// Same search with phi(x) and grad(x)^T d already known.
ArmijoResult armijo_backtrack(const NlsProblem& problem, const Vector& x, const Vector& d,
                              double phi0, double slope, double nu, double zeta,
                              int max_backtracks);

/// Unit steps until the gradient test fires (config.mode is ignored).
SolveTrace pure_solve(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x0,
                      const SolverConfig& config);

/// Line-search globalized iteration: full-step test, safeguard, Armijo.
SolveTrace algorithm1_solve(const NlsProblem& problem, const ScalingSpec& scaling,
                            const Vector& x0, const SolverConfig& config);

/// algorithm1_solve with L = I.
SolveTrace classic_lm_solve(const NlsProblem& problem, const Vector& x0, const SolverConfig& config);

/// Dispatch on config.mode.
SolveTrace solve(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x0,
                 const SolverConfig& config);

}  // namespace lmmss
