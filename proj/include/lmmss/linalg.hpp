#pragma once

// Dense linear algebra for scaled Levenberg-Marquardt steps: the generalized
// SVD of a pair (A, L), regularized direction solves through the augmented
// least-squares system, and completeness/rank utilities.
//
// Containers are plain Eigen column-major types. Every routine here is a pure
// function of its arguments.

#include <Eigen/Dense>

#include <iosfwd>
#include <string>

namespace lmmss {

using DenseMatrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Singular values at or below this fraction of the largest one count as zero.
inline constexpr double kRankTolerance = 1e-12;

/// Generalized singular value decomposition of a pair (A, L), A m x n, L p x n:
///
///   A = U * blockdiag(Sigma, I_{n-p}) * X^{-1}
///   L = V * [M 0] * X^{-1}
///
/// with 0 <= sigma_1 <= ... <= sigma_p <= 1, 1 >= mu_1 >= ... >= mu_p > 0 and
/// sigma_i^2 + mu_i^2 = 1. generalized_values holds gamma_i = sigma_i / mu_i.
struct GsvdFactors {
  DenseMatrix u;      // m x n, orthonormal columns
  DenseMatrix v;      // p x p, orthogonal
  DenseMatrix x;      // n x n, nonsingular
  DenseMatrix x_inv;  // n x n, X^{-1} as produced by the factorization
  Vector sigma;
  Vector mu;
  Vector generalized_values;

  /// U * blockdiag(Sigma, I) * X^{-1}
  DenseMatrix reconstruct_a() const;
  /// V * [M 0] * X^{-1}
  DenseMatrix reconstruct_l() const;
};

/// Throws DimensionMismatch unless m >= n >= p, RankDeficientL if rank(l) < p,
/// CompletenessViolation if null(a) and null(l) share a nonzero vector.
GsvdFactors gsvd(const DenseMatrix& a, const DenseMatrix& l);

/// Minimizer of ||[J; sqrt(lambda) L] d + [F; 0]||, i.e. the solution of
/// (J^T J + lambda L^T L) d = -J^T F whenever that matrix is nonsingular.
/// The normal matrix is never formed. In the singular case the minimum-norm
/// least-squares solution is returned.
Vector solve_scaled_direction(const DenseMatrix& j, const Vector& f, const DenseMatrix& l,
                              double lambda);

/// Classic Levenberg-Marquardt direction, (J^T J + lambda I) d = -J^T F.
Vector solve_classic_lm_direction(const DenseMatrix& j, const Vector& f, double lambda);

/// Smallest eigenvalue of J^T J + L^T L, computed as sigma_min([J; L])^2.
/// This is the largest gamma with ||Jv||^2 + ||Lv||^2 >= gamma ||v||^2.
double completeness_gamma(const DenseMatrix& j, const DenseMatrix& l);

/// Scale-relative completeness test: gamma <= 1e-12 (||J||^2 + ||L||^2).
bool completeness_violated(const DenseMatrix& j, const DenseMatrix& l);

double spectral_norm(const DenseMatrix& a);

/// Numerical rank with the relative threshold kRankTolerance.
Eigen::Index numerical_rank(const DenseMatrix& a);

/// The closed-form direction -X blockdiag(Gamma, I) X^T J^T F with
/// Gamma = (Sigma^2 + lambda M^2)^{-1}, for a precomputed GSVD of (J, L).
Vector gsvd_direction(const GsvdFactors& factors, const DenseMatrix& j, const Vector& f,
                      double lambda);

/// ||blockdiag(Gamma, I)|| = max(1, max_i 1 / (sigma_i^2 + lambda mu_i^2)).
double gamma_block_norm(const GsvdFactors& factors, double lambda);

/// psi(gamma, lambda) = (gamma^2 + 1) / (gamma^2 + lambda).
double psi(double gamma, double lambda);

/// Plain-text matrix: first line "rows cols", then one whitespace-separated
/// row per line.
DenseMatrix read_matrix(std::istream& in);
DenseMatrix read_matrix_file(const std::string& path);

}  // namespace lmmss
