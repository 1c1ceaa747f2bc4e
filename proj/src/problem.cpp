#include "lmmss/problem.hpp"

#include "lmmss/error.hpp"

#include <cmath>
#include <limits>
#include <utility>

namespace lmmss {

ScalingSpec::ScalingSpec(DenseMatrix matrix, Kind kind) : matrix_(std::move(matrix)), kind_(kind) {
  if (matrix_.rows() < 1 || matrix_.rows() > matrix_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "scaling matrix must be p x n with 1 <= p <= n");
  }
  if (!matrix_.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, "scaling matrix has non-finite entries");
  }
  if (numerical_rank(matrix_) < matrix_.rows()) {
    throw Error(ErrorCode::RankDeficientL, "scaling matrix does not have full row rank");
  }
}

ScalingSpec ScalingSpec::identity(Eigen::Index n) {
  return ScalingSpec(DenseMatrix::Identity(n, n), Kind::identity);
}

ScalingSpec ScalingSpec::custom(DenseMatrix matrix) {
  return ScalingSpec(std::move(matrix), Kind::custom);
}

ScalingSpec ScalingSpec::first_difference(Eigen::Index n) {
  if (n < 2) throw Error(ErrorCode::DimensionMismatch, "first difference needs n >= 2");
  DenseMatrix d = DenseMatrix::Zero(n - 1, n);
  for (Eigen::Index i = 0; i + 1 < n; ++i) {
    d(i, i) = -1.0;
    d(i, i + 1) = 1.0;
  }
  return ScalingSpec(std::move(d), Kind::first_difference);
}

std::string_view to_string(ScalingSpec::Kind kind) {
  switch (kind) {
    case ScalingSpec::Kind::identity: return "identity";
    case ScalingSpec::Kind::custom: return "custom";
    case ScalingSpec::Kind::first_difference: return "first-difference";
  }
  return "custom";
}

NlsProblem::NlsProblem(std::string name, Eigen::Index m, Eigen::Index n, ResidualFn residual,
                       JacobianFn jacobian)
    : name_(std::move(name)), m_(m), n_(n), residual_(std::move(residual)),
      jacobian_(std::move(jacobian)) {
  if (n_ < 1 || m_ < n_) {
    throw Error(ErrorCode::DimensionMismatch,
                "problem needs m >= n >= 1, got m=" + std::to_string(m_) + " n=" + std::to_string(n_));
  }
  if (!residual_) throw Error(ErrorCode::InvalidConfig, "problem has no residual function");
}

void NlsProblem::check_point(const Vector& x) const {
  if (x.size() != n_) {
    throw Error(ErrorCode::DimensionMismatch,
                "point has length " + std::to_string(x.size()) + ", expected " + std::to_string(n_));
  }
  if (!x.allFinite()) throw Error(ErrorCode::NonFiniteInput, "point has non-finite entries");
}

Vector NlsProblem::residual(const Vector& x) const {
  check_point(x);
  Vector f = residual_(x);
  if (f.size() != m_ || !f.allFinite()) {
    throw Error(ErrorCode::NonFiniteResidual, "residual of '" + name_ + "' is malformed or non-finite");
  }
  return f;
}

DenseMatrix NlsProblem::jacobian(const Vector& x) const {
  check_point(x);
  DenseMatrix j = jacobian_ ? jacobian_(x) : finite_difference_jacobian(*this, x);
  if (j.rows() != m_ || j.cols() != n_ || !j.allFinite()) {
    throw Error(ErrorCode::NonFiniteJacobian, "jacobian of '" + name_ + "' is malformed or non-finite");
  }
  return j;
}

NlsProblem& NlsProblem::with_distance(DistanceFn fn) {
  distance_ = std::move(fn);
  return *this;
}

NlsProblem& NlsProblem::with_surrogate_distance(DistanceFn fn) {
  surrogate_ = std::move(fn);
  return *this;
}

NlsProblem& NlsProblem::with_distance_applicability(ApplicabilityFn fn) {
  applicability_ = std::move(fn);
  return *this;
}

std::optional<double> NlsProblem::distance(const Vector& x) const {
  if (!distance_) return std::nullopt;
  return distance_(x);
}

std::optional<double> NlsProblem::surrogate_distance(const Vector& x) const {
  if (!surrogate_) return std::nullopt;
  return surrogate_(x);
}

bool NlsProblem::distance_applies_to(const Vector& final_x) const {
  if (!distance_) return false;
  return applicability_ ? applicability_(final_x) : true;
}

double eval_phi(const NlsProblem& problem, const Vector& x) {
  return 0.5 * problem.residual(x).squaredNorm();
}

Vector eval_gradient(const NlsProblem& problem, const Vector& x) {
  return problem.jacobian(x).transpose() * problem.residual(x);
}

DenseMatrix finite_difference_jacobian(const NlsProblem& problem, const Vector& x,
                                       std::optional<double> h, FdScheme scheme) {
  const double step = h.value_or(std::sqrt(std::numeric_limits<double>::epsilon()) *
                                 std::max(1.0, x.lpNorm<Eigen::Infinity>()));
  if (!(step > 0.0) || !std::isfinite(step)) {
    throw Error(ErrorCode::InvalidConfig, "finite-difference step must be positive");
  }
  const Vector f0 = problem.residual(x);
  DenseMatrix j(problem.m(), problem.n());
  for (Eigen::Index i = 0; i < problem.n(); ++i) {
    Vector xp = x;
    xp(i) += step;
    if (scheme == FdScheme::forward) {
      j.col(i) = (problem.residual(xp) - f0) / step;
    } else {
      Vector xm = x;
      xm(i) -= step;
      j.col(i) = (problem.residual(xp) - problem.residual(xm)) / (2.0 * step);
    }
  }
  return j;
}

namespace {

Vector vec2(double a, double b) {
  Vector v(2);
  v << a, b;
  return v;
}

DenseMatrix row_minus_one_one() {
  DenseMatrix l(1, 2);
  l << -1.0, 1.0;
  return l;
}

// F = (x1^2 + x2^2 - 1, x1^2 + x2^2 - 9); X* is the circle of radius sqrt(5).
BuiltinProblem make_ex1() {
  NlsProblem p(
      "ex1", 2, 2,
      [](const Vector& x) {
        const double s = x.squaredNorm();
        return vec2(s - 1.0, s - 9.0);
      },
      [](const Vector& x) {
        DenseMatrix j(2, 2);
        j << 2 * x(0), 2 * x(1), 2 * x(0), 2 * x(1);
        return j;
      });
  p.with_distance([](const Vector& x) { return std::abs(x.norm() - std::sqrt(5.0)); })
      .with_surrogate_distance([](const Vector& x) { return std::abs(x.squaredNorm() - 5.0); });
  return {std::move(p), ScalingSpec::custom(row_minus_one_one()),
          {vec2(0.0, std::sqrt(5.0) + 0.03), vec2(0.01, std::sqrt(5.0) - 0.01), vec2(2.0, 4.0),
           vec2(-1.0, 3.0)}};
}

// F = (x1^3 - x1 x2 + 1, x1^3 + x1 x2 + 1); local stationary set {x1 = 0},
// isolated global minimizer (-1, 0).
BuiltinProblem make_ex2() {
  NlsProblem p(
      "ex2", 2, 2,
      [](const Vector& x) {
        const double c = x(0) * x(0) * x(0);
        const double b = x(0) * x(1);
        return vec2(c - b + 1.0, c + b + 1.0);
      },
      [](const Vector& x) {
        const double q = 3.0 * x(0) * x(0);
        DenseMatrix j(2, 2);
        j << q - x(1), -x(0), q + x(1), x(0);
        return j;
      });
  p.with_distance([](const Vector& x) { return std::abs(x(0)); })
      .with_distance_applicability([](const Vector& x) { return (x - vec2(-1.0, 0.0)).norm() > 0.1; });
  return {std::move(p), ScalingSpec::custom(row_minus_one_one()), {vec2(0.8, 2.1)}};
}

// F = (x1^2, x2^2, x1 + x2, 1); single stationary point at the origin where
// rank J drops from 2 to 1.
BuiltinProblem make_ex3() {
  NlsProblem p(
      "ex3", 4, 2,
      [](const Vector& x) {
        Vector f(4);
        f << x(0) * x(0), x(1) * x(1), x(0) + x(1), 1.0;
        return f;
      },
      [](const Vector& x) {
        DenseMatrix j(4, 2);
        j << 2 * x(0), 0.0, 0.0, 2 * x(1), 1.0, 1.0, 0.0, 0.0;
        return j;
      });
  p.with_distance([](const Vector& x) { return x.norm(); });
  return {std::move(p), ScalingSpec::custom(row_minus_one_one()), {vec2(3.0, 3.0), vec2(-2.0, -2.0)}};
}

}  // namespace

BuiltinProblem builtin_problem(std::string_view name) {
  if (name == "ex1") return make_ex1();
  if (name == "ex2") return make_ex2();
  if (name == "ex3") return make_ex3();
  throw Error(ErrorCode::UnknownProblem, "no built-in problem named '" + std::string(name) + "'");
}

std::vector<std::string> builtin_problem_names() { return {"ex1", "ex2", "ex3"}; }

}  // namespace lmmss
