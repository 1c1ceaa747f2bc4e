#include "lmmss/solver.hpp"

#include "lmmss/error.hpp"

#include <cmath>
#include <limits>

namespace lmmss {

std::string_view to_string(SolveMode mode) {
  switch (mode) {
    case SolveMode::pure: return "pure";
    case SolveMode::globalized: return "globalized";
    case SolveMode::classic_lm: return "classic-lm";
  }
  return "globalized";
}

std::string_view to_string(DirectionKind kind) {
  return kind == DirectionKind::scaled ? "scaled" : "safeguard-lm";
}

std::string_view to_string(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return "converged";
    case SolveStatus::max_iters: return "max-iters";
    case SolveStatus::linesearch_failure: return "linesearch-failure";
    case SolveStatus::numerical_error: return "numerical-error";
  }
  return "numerical-error";
}

std::optional<SolveMode> parse_solve_mode(std::string_view text) {
  if (text == "pure") return SolveMode::pure;
  if (text == "globalized") return SolveMode::globalized;
  if (text == "classic-lm") return SolveMode::classic_lm;
  return std::nullopt;
}

void SolverConfig::validate() const {
  auto open_unit = [](double v) { return v > 0.0 && v < 1.0; };
  if (!open_unit(nu)) throw Error(ErrorCode::InvalidConfig, "nu must lie in (0,1)");
  if (!open_unit(zeta)) throw Error(ErrorCode::InvalidConfig, "zeta must lie in (0,1)");
  if (!open_unit(vartheta)) throw Error(ErrorCode::InvalidConfig, "vartheta must lie in (0,1)");
  if (!open_unit(theta)) throw Error(ErrorCode::InvalidConfig, "theta must lie in (0,1)");
  if (!(m_cap > 0.0) || !std::isfinite(m_cap)) {
    throw Error(ErrorCode::InvalidConfig, "M must be positive");
  }
  if (!(lambda_exponent > 0.0 && lambda_exponent <= 1.0)) {
    throw Error(ErrorCode::InvalidConfig, "lambda exponent must lie in (0,1]");
  }
  if (!(grad_tol > 0.0)) throw Error(ErrorCode::InvalidConfig, "grad_tol must be positive");
  if (max_iters < 1) throw Error(ErrorCode::InvalidConfig, "max_iters must be at least 1");
  if (max_backtracks < 0) throw Error(ErrorCode::InvalidConfig, "max_backtracks must be >= 0");
}

int SolveTrace::iterations() const {
  int steps = 0;
  for (const auto& rec : records) steps += rec.has_step ? 1 : 0;
  return steps;
}

bool SolveTrace::phi_strictly_decreasing() const {
  for (std::size_t i = 1; i < records.size(); ++i) {
    if (!(records[i].phi < records[i - 1].phi)) return false;
  }
  return true;
}

namespace {

double lambda_for(double grad_norm, double r) {
  return std::max(std::pow(grad_norm, r), kLambdaFloor);
}

IterateRecord start_record(const NlsProblem& problem, int k, const Vector& x, const Vector& f,
                           double grad_norm, double r) {
  IterateRecord rec;
  rec.k = k;
  rec.x = x;
  rec.phi = 0.5 * f.squaredNorm();
  rec.grad_norm = grad_norm;
  rec.lambda = lambda_for(grad_norm, r);
  rec.dist = problem.distance(x);
  rec.surrogate_dist = problem.surrogate_distance(x);
  return rec;
}

void finish(SolveTrace& trace, const NlsProblem& problem, const Vector& x, SolveStatus status,
            std::string message = {}) {
  trace.status = status;
  trace.final_x = x;
  trace.message = std::move(message);
  trace.dist_applicable = problem.distance_applies_to(x);
}

// Closing record at the point where a run stopped on an error, when that
// point can still be evaluated.
void close_trace(SolveTrace& trace, const NlsProblem& problem, const Vector& x, double r) {
  if (!trace.records.empty() && !trace.records.back().has_step) return;
  try {
    const Vector f = problem.residual(x);
    const double gn = (problem.jacobian(x).transpose() * f).norm();
    trace.records.push_back(start_record(problem, static_cast<int>(trace.records.size()), x, f, gn, r));
  } catch (const Error&) {
  }
}

// Gradient norm at a trial point; +inf when the point is outside the domain
// of finite evaluation.
double trial_gradient_norm(const NlsProblem& problem, const Vector& x) {
  try {
    return eval_gradient(problem, x).norm();
  } catch (const Error&) {
    return std::numeric_limits<double>::infinity();
  }
}

void check_start(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x0) {
  if (scaling.matrix().cols() != problem.n()) {
    throw Error(ErrorCode::DimensionMismatch, "scaling matrix columns differ from problem dimension");
  }
  if (x0.size() != problem.n()) {
    throw Error(ErrorCode::DimensionMismatch, "starting point has length " + std::to_string(x0.size()) +
                                                  ", problem has n = " + std::to_string(problem.n()));
  }
  if (!x0.allFinite()) throw Error(ErrorCode::NonFiniteInput, "starting point is not finite");
}

}  // namespace

StepResult pure_step(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x,
                     double r, double grad_tol) {
  const Vector f = problem.residual(x);
  const DenseMatrix j = problem.jacobian(x);
  const Vector g = j.transpose() * f;
  const double gn = g.norm();
  if (gn <= grad_tol || gn == 0.0) {
    throw Error(ErrorCode::StationaryInput, "gradient norm " + std::to_string(gn) + " at the input point");
  }
  const DenseMatrix& l = scaling.matrix();
  if (completeness_violated(j, l)) {
    throw Error(ErrorCode::CompletenessViolation, "J^T J + lambda L^T L is numerically singular");
  }
  IterateRecord rec = start_record(problem, 0, x, f, gn, r);
  rec.direction = solve_scaled_direction(j, f, l, rec.lambda);
  rec.has_step = true;
  rec.dir_kind = DirectionKind::scaled;
  rec.alpha = 1.0;
  rec.full_step_accepted = true;
  return {x + rec.direction, std::move(rec)};
}

ArmijoResult armijo_backtrack(const NlsProblem& problem, const Vector& x, const Vector& d,
                              double nu, double zeta, int max_backtracks) {
  const Vector f = problem.residual(x);
  const Vector g = problem.jacobian(x).transpose() * f;
  return armijo_backtrack(problem, x, d, 0.5 * f.squaredNorm(), g.dot(d), nu, zeta, max_backtracks);
}

ArmijoResult armijo_backtrack(const NlsProblem& problem, const Vector& x, const Vector& d,
                              double phi0, double slope, double nu, double zeta,
                              int max_backtracks) {
  if (!(slope < 0.0)) {
    throw Error(ErrorCode::NotDescent, "grad^T d = " + std::to_string(slope) + " is not negative");
  }
  double alpha = 1.0;
  for (int m = 0; m <= max_backtracks; ++m) {
    double phi_trial = std::numeric_limits<double>::infinity();
    try {
      phi_trial = eval_phi(problem, x + alpha * d);
    } catch (const Error&) {
      // Non-finite trial residual: keep shrinking.
    }
    if (phi_trial - phi0 <= nu * alpha * slope) return {m, alpha};
    alpha *= zeta;
  }
  throw Error(ErrorCode::LinesearchFailure,
              "no sufficient decrease within " + std::to_string(max_backtracks) + " backtracks");
}

SolveTrace pure_solve(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x0,
                      const SolverConfig& config) {
  config.validate();
  check_start(problem, scaling, x0);
  SolveTrace trace;
  Vector x = x0;
  const double r = config.lambda_exponent;
  try {
    for (int k = 0;; ++k) {
      const Vector f = problem.residual(x);
      const double gn = (problem.jacobian(x).transpose() * f).norm();
      if (gn <= config.grad_tol || k == config.max_iters) {
        trace.records.push_back(start_record(problem, k, x, f, gn, r));
        finish(trace, problem, x, gn <= config.grad_tol ? SolveStatus::converged : SolveStatus::max_iters);
        return trace;
      }
      StepResult step = pure_step(problem, scaling, x, r, config.grad_tol);
      step.record.k = k;
      trace.records.push_back(std::move(step.record));
      x = std::move(step.x_next);
    }
  } catch (const Error& e) {
    close_trace(trace, problem, x, r);
    finish(trace, problem, x, SolveStatus::numerical_error, e.what());
  }
  return trace;
}

SolveTrace algorithm1_solve(const NlsProblem& problem, const ScalingSpec& scaling,
                            const Vector& x0, const SolverConfig& config) {
  config.validate();
  check_start(problem, scaling, x0);
  SolveTrace trace;
  Vector x = x0;
  const double r = config.lambda_exponent;
  const DenseMatrix& l = scaling.matrix();
  try {
    for (int k = 0;; ++k) {
      const Vector f = problem.residual(x);
      const DenseMatrix j = problem.jacobian(x);
      const Vector g = j.transpose() * f;
      const double gn = g.norm();
      IterateRecord rec = start_record(problem, k, x, f, gn, r);

      // stopping test
      if (gn <= config.grad_tol || k == config.max_iters) {
        trace.records.push_back(std::move(rec));
        finish(trace, problem, x, gn <= config.grad_tol ? SolveStatus::converged : SolveStatus::max_iters);
        return trace;
      }

      // scaled direction
      Vector d = solve_scaled_direction(j, f, l, rec.lambda);
      rec.dir_kind = DirectionKind::scaled;
      if (!d.allFinite()) {
        trace.records.push_back(std::move(rec));
        finish(trace, problem, x, SolveStatus::numerical_error, "non-finite direction");
        return trace;
      }

      // full step
      const Vector x_full = x + d;
      if (trial_gradient_norm(problem, x_full) <= config.vartheta * gn) {
        rec.has_step = true;
        rec.direction = std::move(d);
        rec.alpha = 1.0;
        rec.full_step_accepted = true;
        trace.records.push_back(std::move(rec));
        x = x_full;
        continue;
      }

      // safeguard
      if (config.safeguard && (d.norm() > config.m_cap || -g.dot(d) < config.theta * gn * gn)) {
        d = solve_classic_lm_direction(j, f, rec.lambda);
        rec.dir_kind = DirectionKind::safeguard_lm;
      }

      // backtracking
      ArmijoResult ls;
      try {
        ls = armijo_backtrack(problem, x, d, rec.phi, g.dot(d), config.nu, config.zeta,
                              config.max_backtracks);
      } catch (const Error& e) {
        if (e.code() != ErrorCode::NotDescent && e.code() != ErrorCode::LinesearchFailure) throw;
        rec.direction = std::move(d);
        trace.records.push_back(std::move(rec));
        finish(trace, problem, x, SolveStatus::linesearch_failure, e.what());
        return trace;
      }

      rec.has_step = true;
      rec.alpha = ls.alpha;
      rec.backtracks = ls.backtracks;
      rec.full_step_accepted = false;
      x = x + ls.alpha * d;
      rec.direction = std::move(d);
      trace.records.push_back(std::move(rec));
    }
  } catch (const Error& e) {
    close_trace(trace, problem, x, r);
    finish(trace, problem, x, SolveStatus::numerical_error, e.what());
  }
  return trace;
}

SolveTrace classic_lm_solve(const NlsProblem& problem, const Vector& x0, const SolverConfig& config) {
  return algorithm1_solve(problem, ScalingSpec::identity(problem.n()), x0, config);
}

SolveTrace solve(const NlsProblem& problem, const ScalingSpec& scaling, const Vector& x0,
                 const SolverConfig& config) {
  switch (config.mode) {
    case SolveMode::pure: return pure_solve(problem, scaling, x0, config);
    case SolveMode::globalized: return algorithm1_solve(problem, scaling, x0, config);
    case SolveMode::classic_lm: return classic_lm_solve(problem, x0, config);
  }
  return algorithm1_solve(problem, scaling, x0, config);
}

}  // namespace lmmss
