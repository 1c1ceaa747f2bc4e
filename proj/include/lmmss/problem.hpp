#pragma once

#include "lmmss/linalg.hpp"

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmmss {

/// Scaling matrix L (p x n, full row rank) for the regularization term.
class ScalingSpec {
 public:
  enum class Kind { identity, custom, first_difference };

  static ScalingSpec identity(Eigen::Index n);
  /// Throws RankDeficientL unless rank(matrix) == rows(matrix) <= cols(matrix).
  static ScalingSpec custom(DenseMatrix matrix);
  /// (n-1) x n forward-difference operator, rows e_{i+1} - e_i.
  static ScalingSpec first_difference(Eigen::Index n);

  const DenseMatrix& matrix() const noexcept { return matrix_; }
  Kind kind() const noexcept { return kind_; }

 private:
  ScalingSpec(DenseMatrix matrix, Kind kind);

  DenseMatrix matrix_;
  Kind kind_;
};

std::string_view to_string(ScalingSpec::Kind kind);

/// Nonlinear least-squares instance min 1/2 ||F(x)||^2 with F: R^n -> R^m, m >= n.
///
/// The distance oracles are for diagnostics and tests; the solver never
/// consults them.
class NlsProblem {
 public:
  using ResidualFn = std::function<Vector(const Vector&)>;
  using JacobianFn = std::function<DenseMatrix(const Vector&)>;
  using DistanceFn = std::function<double(const Vector&)>;
  using ApplicabilityFn = std::function<bool(const Vector&)>;

  /// An empty jacobian falls back to forward differences.
  NlsProblem(std::string name, Eigen::Index m, Eigen::Index n, ResidualFn residual,
             JacobianFn jacobian = {});

  const std::string& name() const noexcept { return name_; }
  Eigen::Index m() const noexcept { return m_; }
  Eigen::Index n() const noexcept { return n_; }
  bool has_analytic_jacobian() const noexcept { return static_cast<bool>(jacobian_); }

  /// Throws DimensionMismatch on a wrong-length x, NonFiniteInput on a
  /// non-finite x, NonFiniteResidual if F(x) has the wrong shape or is not finite.
  Vector residual(const Vector& x) const;
  /// Throws NonFiniteJacobian if J(x) has the wrong shape or is not finite.
  DenseMatrix jacobian(const Vector& x) const;

  NlsProblem& with_distance(DistanceFn fn);
  NlsProblem& with_surrogate_distance(DistanceFn fn);
  /// Predicate on a run's final point telling whether the distance oracle
  /// describes the stationary set that run approached.
  NlsProblem& with_distance_applicability(ApplicabilityFn fn);

  bool has_distance() const noexcept { return static_cast<bool>(distance_); }
  std::optional<double> distance(const Vector& x) const;
  std::optional<double> surrogate_distance(const Vector& x) const;
  bool distance_applies_to(const Vector& final_x) const;

 private:
  void check_point(const Vector& x) const;

  std::string name_;
  Eigen::Index m_;
  Eigen::Index n_;
  ResidualFn residual_;
  JacobianFn jacobian_;
  DistanceFn distance_;
  DistanceFn surrogate_;
  ApplicabilityFn applicability_;
};

/// phi(x) = 1/2 ||F(x)||^2
double eval_phi(const NlsProblem& problem, const Vector& x);

/// grad phi(x) = J(x)^T F(x)
Vector eval_gradient(const NlsProblem& problem, const Vector& x);

enum class FdScheme { forward, central };

/// Column i is (F(x + h e_i) - F(x)) / h, or the central quotient.
/// Without h the step is sqrt(machine epsilon) * max(1, ||x||_inf).
DenseMatrix finite_difference_jacobian(const NlsProblem& problem, const Vector& x,
                                       std::optional<double> h = std::nullopt,
                                       FdScheme scheme = FdScheme::forward);

struct BuiltinProblem {
  NlsProblem problem;
  ScalingSpec scaling;
  std::vector<Vector> starts;
};

/// "ex1", "ex2" or "ex3"; throws UnknownProblem otherwise.
BuiltinProblem builtin_problem(std::string_view name);

std::vector<std::string> builtin_problem_names();

}  // namespace lmmss
