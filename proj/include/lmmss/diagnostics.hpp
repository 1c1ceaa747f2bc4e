#pragma once

// Empirical probes for the local convergence hypotheses (completeness, Lipschitz
// Jacobian, error bound, linearization bound), convergence-order estimation,
// and per-iterate auditing of solver traces.

#include "lmmss/kernels.hpp"
#include "lmmss/linalg.hpp"
#include "lmmss/problem.hpp"
#include "lmmss/solver.hpp"

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lmmss {

// ---------------------------------------------------------------------------
// Convergence order

enum class RateClass { linear, superlinear, quadratic, inconclusive };
std::string_view to_string(RateClass c);

/// Entries at or below this are treated as roundoff and dropped.
inline constexpr double kRateFloor = 1e-15;
/// Number of trailing points the order estimate looks at.
inline constexpr std::size_t kRateTailPoints = 5;

struct RateEstimate {
  double order_q = 0.0;
  std::vector<double> ratio_tail;  // d_{k+1} / d_k^q over the tail
  RateClass classification = RateClass::inconclusive;
};

/// Median of log(d_{k+1}/d_k) / log(d_k/d_{k-1}) over the triples of the last
/// kRateTailPoints entries. Throws TooShort for fewer than 4 entries and
/// NotDecreasing if the retained entries are not strictly decreasing.
RateEstimate estimate_rate(std::span<const double> seq);

// ---------------------------------------------------------------------------
// Error bound

struct RatioStats {
  double min = 0.0;
  double max = 0.0;
  double mean = 0.0;
  std::size_t count = 0;
};

/// Samples with dist at or below this are excluded from error-bound ratios.
inline constexpr double kDistFloor = 1e-12;

struct ErrorBoundReport {
  Vector center;
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  std::size_t excluded = 0;
  RatioStats stats;
};

/// Ratios ||J^T F|| / dist(x, X*) at uniform samples in B(center, radius).
/// Throws NoDistOracle when the problem has no distance oracle.
ErrorBoundReport probe_error_bound(const NlsProblem& problem, const Vector& center, double radius,
                                   std::size_t samples, std::uint64_t seed,
                                   Execution exec = Execution::parallel);

/// The same ratio at caller-chosen points; nullopt where dist <= kDistFloor.
std::vector<std::optional<double>> error_bound_ratios(const NlsProblem& problem,
                                                      const std::vector<Vector>& points,
                                                      Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Linearization bound ||(J(x) - J(z))^T F(z)|| <= C ||x - z||^{1+r}

struct LinearizationFit {
  double r = 0.0;
  double c = 0.0;
  /// Every pair has a numerically zero left side; the bound holds with C = 0
  /// for any r and r is reported as 1.
  bool degenerate_zero = false;
  /// Residual spread above one decade, or r outside (0, 1.5].
  bool no_fit = false;
  double spread_decades = 0.0;
  std::size_t pairs_total = 0;
  std::size_t pairs_fitted = 0;
  std::size_t stationary_used = 0;
};

/// Stationary points must satisfy ||grad phi|| <= 1e-10; others are ignored.
/// Throws NoStationarySamples when none qualify.
LinearizationFit probe_linearization(const NlsProblem& problem,
                                     const std::vector<Vector>& stationary_points,
                                     const std::vector<Vector>& test_points);

// ---------------------------------------------------------------------------
// Lipschitz constant of J

struct LipschitzReport {
  Vector center;
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::size_t samples = 0;
  double estimate = 0.0;
};

/// max ||J(x) - J(y)|| / ||x - y|| over all pairs of samples (spectral norm).
LipschitzReport probe_lipschitz(const NlsProblem& problem, const Vector& center, double radius,
                                std::size_t samples, std::uint64_t seed,
                                Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Completeness

struct CompletenessScan {
  Grid grid;
  std::vector<double> gamma;
  std::vector<bool> violated;

  std::size_t violation_count() const;
  double gamma_min() const;
};

/// completeness_gamma(J(x), L) at every grid point; violations use the
/// scale-relative test of completeness_violated.
CompletenessScan completeness_scan(const NlsProblem& problem, const ScalingSpec& scaling,
                                   const Grid& grid, Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Combined report

struct AssumptionReport {
  Vector center;
  double radius = 0.0;
  std::uint64_t seed = 0;
  std::size_t sample_count = 0;
  double gamma_min = 0.0;
  std::optional<RatioStats> omega_ratio_stats;
  double lipschitz_estimate = 0.0;
  std::optional<LinearizationFit> linearization_fit;
};

AssumptionReport assess_assumptions(const NlsProblem& problem, const ScalingSpec& scaling,
                                    const Vector& center, double radius, std::size_t samples,
                                    std::uint64_t seed,
                                    const std::vector<Vector>& stationary_points = {},
                                    Execution exec = Execution::parallel);

// ---------------------------------------------------------------------------
// Trace audit

/// Iterates whose completeness constant is at or below this are not audited.
inline constexpr double kAuditGammaFloor = 1e-8;

struct AuditViolation {
  int k = 0;
  std::string check;
  double lhs = 0.0;
  double rhs = 0.0;
};

struct AuditReport {
  std::vector<AuditViolation> violations;
  int audited = 0;
  int skipped = 0;

  bool clean() const { return violations.empty(); }
};

/// Per iterate with a direction: ||X_k|| <= 1/sqrt(gamma_k),
/// ||blockdiag(Gamma_k, I)|| <= max(1, 1/lambda_k),
/// grad^T d <= -gamma_k min(1, lambda_k) ||d||^2 for scaled directions, and
/// -grad^T d >= lambda_k ||d||^2 with ||d|| <= ||grad|| / lambda_k for
/// safeguard directions.
AuditReport audit_trace(const SolveTrace& trace, const NlsProblem& problem,
                        const ScalingSpec& scaling);

// ---------------------------------------------------------------------------
// Monotonicity of phi (diagnostic only)

struct MonotoneReport {
  int steps = 0;
  std::vector<int> full_step_increases;  // k with phi(x_{k+1}) >= phi(x_k) after alpha = 1 acceptance
  std::vector<int> armijo_increases;     // same, on Armijo-branch steps

  bool strictly_decreasing() const { return full_step_increases.empty() && armijo_increases.empty(); }
};

MonotoneReport phi_monotonicity(const SolveTrace& trace);

}  // namespace lmmss
