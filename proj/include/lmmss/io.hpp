#pragma once

// Text formats: iterate CSV, key/value reports, grid CSV, and the small
// literal parsers shared by the command-line front end. All output uses '.'
// as decimal separator and LF line endings regardless of locale.

#include "lmmss/diagnostics.hpp"
#include "lmmss/kernels.hpp"
#include "lmmss/problem.hpp"
#include "lmmss/solver.hpp"

#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>

namespace lmmss {

/// 17 significant digits, independent of the global locale.
std::string format_double(double v);
std::string format_vector(const Vector& v, char sep = ';');

inline constexpr std::string_view kTraceCsvHeader =
    "k,x,phi,grad_norm,lambda,alpha,dist,step_norm,dir_kind,full_step";

/// One row per record. dist is left empty when the problem has no oracle or
/// the run ended outside the oracle's stationary set.
void write_trace_csv(std::ostream& out, const SolveTrace& trace);

/// k,x1,x2,... rows of the iterates.
void write_trajectory_csv(std::ostream& out, const SolveTrace& trace);

/// x1,...,xn,<value_name> rows.
void write_grid_csv(std::ostream& out, const Grid& grid, const std::vector<double>& values,
                    std::string_view value_name);

/// "key: value" lines grouped under "[section]" headers.
class ReportWriter {
 public:
  explicit ReportWriter(std::ostream& out) : out_(out) {}

  void section(std::string_view name);
  void kv(std::string_view key, std::string_view value);
  void kv(std::string_view key, double value);
  void kv(std::string_view key, long long value);
  void kv(std::string_view key, const Vector& value);

 private:
  std::ostream& out_;
  bool first_ = true;
};

void write_run_summary(ReportWriter& w, const NlsProblem& problem, const SolveTrace& trace,
                       const SolverConfig& config);
void write_error_bound(ReportWriter& w, const ErrorBoundReport& r);
void write_lipschitz(ReportWriter& w, const LipschitzReport& r);
void write_linearization(ReportWriter& w, const LinearizationFit& fit);
void write_completeness(ReportWriter& w, const CompletenessScan& scan);
void write_audit(ReportWriter& w, const AuditReport& audit);
void write_monotonicity(ReportWriter& w, const MonotoneReport& mono);
void write_assumptions(ReportWriter& w, const AssumptionReport& r);

/// "a,b,c" -> vector; throws InvalidConfig on malformed input.
Vector parse_vector(std::string_view text);
/// "lo:hi:step"
GridAxis parse_grid_axis(std::string_view text);
/// "identity", "builtin" (uses fallback), "first-difference", or matrix rows
/// "a,b;c,d".
ScalingSpec parse_scaling(std::string_view text, Eigen::Index n,
                          const std::optional<ScalingSpec>& builtin);

}  // namespace lmmss
