#include "lmmss/linalg.hpp"

#include "lmmss/error.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <string>
#include <cmath>
#include <fstream>
#include <istream>
#include <numeric>
#include <sstream>
#include <vector>

namespace lmmss {

namespace {

void require_finite(const DenseMatrix& a, const char* what) {
  if (!a.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite entries");
  }
}

void require_finite(const Vector& v, const char* what) {
  if (!v.allFinite()) {
    throw Error(ErrorCode::NonFiniteInput, std::string(what) + " has non-finite entries");
  }
}

std::string shape(const DenseMatrix& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

Vector singular_values(const DenseMatrix& a) {
  if (a.size() == 0) return Vector();
  Eigen::JacobiSVD<DenseMatrix> svd(a);
  return svd.singularValues();
}

// Least-squares solve of [J; sqrt(lambda) S] d = [-F; 0] for a p x n block S.
Vector solve_augmented(const DenseMatrix& j, const Vector& f, const DenseMatrix& s, double lambda) {
  const Eigen::Index m = j.rows();
  const Eigen::Index p = s.rows();
  const Eigen::Index n = j.cols();
  DenseMatrix b(m + p, n);
  b.topRows(m) = j;
  b.bottomRows(p) = std::sqrt(lambda) * s;
  Vector c = Vector::Zero(m + p);
  c.head(m) = -f;
  Eigen::CompleteOrthogonalDecomposition<DenseMatrix> cod(b);
  return cod.solve(c);
}

void check_direction_inputs(const DenseMatrix& j, const Vector& f, double lambda) {
  if (j.rows() != f.size()) {
    throw Error(ErrorCode::DimensionMismatch,
                "jacobian is " + shape(j) + " but residual has length " + std::to_string(f.size()));
  }
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw Error(ErrorCode::NonFiniteInput, "lambda must be positive and finite");
  }
  require_finite(j, "jacobian");
  require_finite(f, "residual");
}

}  // namespace

DenseMatrix GsvdFactors::reconstruct_a() const {
  const Eigen::Index n = x_inv.rows();
  const Eigen::Index p = sigma.size();
  Vector d = Vector::Ones(n);
  d.head(p) = sigma;
  return u * d.asDiagonal() * x_inv;
}

DenseMatrix GsvdFactors::reconstruct_l() const {
  const Eigen::Index p = sigma.size();
  return v * mu.asDiagonal() * x_inv.topRows(p);
}

GsvdFactors gsvd(const DenseMatrix& a, const DenseMatrix& l) {
  const Eigen::Index m = a.rows();
  const Eigen::Index n = a.cols();
  const Eigen::Index p = l.rows();
  if (l.cols() != n || m < n || n < p || p < 1) {
    throw Error(ErrorCode::DimensionMismatch,
                "gsvd needs m >= n >= p >= 1, got A " + shape(a) + " and L " + shape(l));
  }
  require_finite(a, "A");
  require_finite(l, "L");
  if (numerical_rank(l) < p) {
    throw Error(ErrorCode::RankDeficientL, "L " + shape(l) + " does not have full row rank");
  }
  if (completeness_violated(a, l)) {
    throw Error(ErrorCode::CompletenessViolation, "null(A) and null(L) share a nonzero vector");
  }

  // [A; L] = Q R with Q = [Q1; Q2] having orthonormal columns.
  DenseMatrix stacked(m + p, n);
  stacked.topRows(m) = a;
  stacked.bottomRows(p) = l;
  Eigen::HouseholderQR<DenseMatrix> qr(stacked);
  const DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(m + p, n);
  const DenseMatrix r = qr.matrixQR().topRows(n).triangularView<Eigen::Upper>();

  // CS step: Q2 = V [M 0] W^T, after which Q1 W has orthogonal columns with
  // norms (sigma_1 .. sigma_p, 1 .. 1).
  Eigen::JacobiSVD<DenseMatrix> svd(q.bottomRows(p), Eigen::ComputeFullU | Eigen::ComputeFullV);
  const DenseMatrix& w = svd.matrixV();
  Vector mu = svd.singularValues();

  // Columns are factored in reverse so zero columns (sigma = 0, rank-deficient
  // A) come last; otherwise Householder picks a vector for them that is not
  // orthogonal to the remaining columns and R loses its diagonal form.
  const DenseMatrix g = q.topRows(m) * w;
  const DenseMatrix g_rev = g.rowwise().reverse();
  Eigen::HouseholderQR<DenseMatrix> gqr(g_rev);
  const DenseMatrix u_rev = gqr.householderQ() * DenseMatrix::Identity(m, n);
  DenseMatrix u = u_rev.rowwise().reverse();
  Vector t = gqr.matrixQR().diagonal().head(n).reverse();
  for (Eigen::Index i = 0; i < n; ++i) {
    if (t(i) < 0.0) {
      t(i) = -t(i);
      u.col(i) = -u.col(i);
    }
  }

  // X^{-1} = S W^T R with S chosen so sigma_i^2 + mu_i^2 = 1 exactly and the
  // identity block absorbs the computed column norms.
  Vector sigma = t.head(p);
  Vector scale(n);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double rho = std::hypot(sigma(i), mu(i));
    sigma(i) /= rho;
    mu(i) /= rho;
    scale(i) = rho;
  }
  for (Eigen::Index i = p; i < n; ++i) scale(i) = t(i);

  DenseMatrix x_inv = scale.asDiagonal() * (w.transpose() * r);
  DenseMatrix x = r.triangularView<Eigen::Upper>().solve(w * scale.cwiseInverse().asDiagonal());

  // Deterministic ordering: sigma ascending, ties broken by mu descending.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index i, Eigen::Index k) {
    if (sigma(i) != sigma(k)) return sigma(i) < sigma(k);
    return mu(i) > mu(k);
  });

  GsvdFactors out;
  out.u = u;
  out.v = DenseMatrix(p, p);
  out.x = x;
  out.x_inv = x_inv;
  out.sigma.resize(p);
  out.mu.resize(p);
  for (Eigen::Index dst = 0; dst < p; ++dst) {
    const Eigen::Index src = order[static_cast<std::size_t>(dst)];
    out.u.col(dst) = u.col(src);
    out.v.col(dst) = svd.matrixU().col(src);
    out.x.col(dst) = x.col(src);
    out.x_inv.row(dst) = x_inv.row(src);
    out.sigma(dst) = sigma(src);
    out.mu(dst) = mu(src);
  }
  out.generalized_values = out.sigma.cwiseQuotient(out.mu);
  return out;
}

Vector solve_scaled_direction(const DenseMatrix& j, const Vector& f, const DenseMatrix& l,
                              double lambda) {
  check_direction_inputs(j, f, lambda);
  if (l.cols() != j.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "scaling matrix is " + shape(l) + " but jacobian is " + shape(j));
  }
  require_finite(l, "scaling matrix");
  return solve_augmented(j, f, l, lambda);
}

Vector solve_classic_lm_direction(const DenseMatrix& j, const Vector& f, double lambda) {
  check_direction_inputs(j, f, lambda);
  return solve_augmented(j, f, DenseMatrix::Identity(j.cols(), j.cols()), lambda);
}

double completeness_gamma(const DenseMatrix& j, const DenseMatrix& l) {
  if (j.cols() != l.cols()) {
    throw Error(ErrorCode::DimensionMismatch,
                "J is " + shape(j) + " but L is " + shape(l));
  }
  const Eigen::Index n = j.cols();
  if (j.rows() + l.rows() < n) return 0.0;
  DenseMatrix stacked(j.rows() + l.rows(), n);
  stacked.topRows(j.rows()) = j;
  stacked.bottomRows(l.rows()) = l;
  const Vector s = singular_values(stacked);
  const double smin = s(s.size() - 1);
  return smin * smin;
}

bool completeness_violated(const DenseMatrix& j, const DenseMatrix& l) {
  const double nj = spectral_norm(j);
  const double nl = spectral_norm(l);
  return completeness_gamma(j, l) <= kRankTolerance * (nj * nj + nl * nl);
}

double spectral_norm(const DenseMatrix& a) {
  const Vector s = singular_values(a);
  return s.size() == 0 ? 0.0 : s(0);
}

Eigen::Index numerical_rank(const DenseMatrix& a) {
  const Vector s = singular_values(a);
  if (s.size() == 0 || s(0) == 0.0) return 0;
  const double cutoff = kRankTolerance * s(0);
  return static_cast<Eigen::Index>((s.array() > cutoff).count());
}

Vector gsvd_direction(const GsvdFactors& factors, const DenseMatrix& j, const Vector& f,
                      double lambda) {
  const Eigen::Index n = factors.x.rows();
  const Eigen::Index p = factors.sigma.size();
  Vector weights = Vector::Ones(n);
  for (Eigen::Index i = 0; i < p; ++i) {
    const double s = factors.sigma(i);
    const double mu = factors.mu(i);
    weights(i) = 1.0 / (s * s + lambda * mu * mu);
  }
  const Vector grad = j.transpose() * f;
  return -(factors.x * (weights.asDiagonal() * (factors.x.transpose() * grad)));
}

double gamma_block_norm(const GsvdFactors& factors, double lambda) {
  double worst = 1.0;
  for (Eigen::Index i = 0; i < factors.sigma.size(); ++i) {
    const double s = factors.sigma(i);
    const double mu = factors.mu(i);
    worst = std::max(worst, 1.0 / (s * s + lambda * mu * mu));
  }
  return worst;
}

double psi(double gamma, double lambda) {
  const double g2 = gamma * gamma;
  return (g2 + 1.0) / (g2 + lambda);
}

DenseMatrix read_matrix(std::istream& in) {
  long rows = -1;
  long cols = -1;
  if (!(in >> rows >> cols) || rows < 0 || cols < 0) {
    throw Error(ErrorCode::DimensionMismatch, "matrix header must be 'rows cols'");
  }
  DenseMatrix a(rows, cols);
  for (long i = 0; i < rows; ++i) {
    for (long k = 0; k < cols; ++k) {
      std::string token;
      if (!(in >> token)) {
        throw Error(ErrorCode::DimensionMismatch,
                    "matrix body ended before " + std::to_string(rows * cols) + " entries");
      }
      const char* end = token.data() + token.size();
      const char* begin = token.data() + (token.front() == '+' ? 1 : 0);
      const auto res = std::from_chars(begin, end, a(i, k));
      if (res.ptr != end || (res.ec != std::errc() && res.ec != std::errc::result_out_of_range)) {
        throw Error(ErrorCode::DimensionMismatch, "not a number in matrix body: '" + token + "'");
      }
      if (res.ec == std::errc::result_out_of_range) a(i, k) = std::strtod(token.c_str(), nullptr);
    }
  }
  std::string extra;
  if (in >> extra) {
    throw Error(ErrorCode::DimensionMismatch, "matrix body has more entries than its header");
  }
  require_finite(a, "matrix file");
  return a;
}

DenseMatrix read_matrix_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::DimensionMismatch, "cannot open matrix file " + path);
  return read_matrix(in);
}

}  // namespace lmmss
