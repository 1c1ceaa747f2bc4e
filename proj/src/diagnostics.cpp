#include "lmmss/diagnostics.hpp"

#include "lmmss/error.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lmmss {

std::string_view to_string(RateClass c) {
  switch (c) {
    case RateClass::linear: return "linear";
    case RateClass::superlinear: return "superlinear";
    case RateClass::quadratic: return "quadratic";
    case RateClass::inconclusive: return "inconclusive";
  }
  return "inconclusive";
}

namespace {

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

RatioStats stats_of(const std::vector<double>& values) {
  RatioStats s;
  if (values.empty()) return s;
  s.min = std::numeric_limits<double>::infinity();
  s.max = -std::numeric_limits<double>::infinity();
  double sum = 0.0;
  for (double v : values) {
    s.min = std::min(s.min, v);
    s.max = std::max(s.max, v);
    sum += v;
  }
  s.count = values.size();
  s.mean = sum / static_cast<double>(values.size());
  return s;
}

}  // namespace

RateEstimate estimate_rate(std::span<const double> seq) {
  if (seq.size() < 4) {
    throw Error(ErrorCode::TooShort, "rate estimation needs at least 4 entries");
  }
  std::vector<double> kept;
  for (double d : seq) {
    if (!std::isfinite(d)) throw Error(ErrorCode::NotDecreasing, "sequence has non-finite entries");
    if (d > kRateFloor) kept.push_back(d);
  }
  for (std::size_t i = 1; i < kept.size(); ++i) {
    if (!(kept[i] < kept[i - 1])) {
      throw Error(ErrorCode::NotDecreasing, "entry " + std::to_string(i) + " does not decrease");
    }
  }

  RateEstimate out;
  if (kept.size() < 3) {
    out.order_q = std::numeric_limits<double>::quiet_NaN();
    return out;
  }
  const std::size_t start = kept.size() > kRateTailPoints ? kept.size() - kRateTailPoints : 0;
  const std::vector<double> tail(kept.begin() + static_cast<std::ptrdiff_t>(start), kept.end());

  std::vector<double> orders;
  for (std::size_t i = 1; i + 1 < tail.size(); ++i) {
    orders.push_back(std::log(tail[i + 1] / tail[i]) / std::log(tail[i] / tail[i - 1]));
  }
  out.order_q = median(orders);
  for (std::size_t i = 0; i + 1 < tail.size(); ++i) {
    out.ratio_tail.push_back(tail[i + 1] / std::pow(tail[i], out.order_q));
  }

  bool ratios_shrink = true;
  for (std::size_t i = 1; i + 1 < tail.size(); ++i) {
    if (!(tail[i + 1] / tail[i] < tail[i] / tail[i - 1])) ratios_shrink = false;
  }
  if (out.order_q >= 1.8) {
    out.classification = RateClass::quadratic;
  } else if (out.order_q >= 1.1 && ratios_shrink) {
    out.classification = RateClass::superlinear;
  } else {
    out.classification = RateClass::linear;
  }
  return out;
}

std::vector<std::optional<double>> error_bound_ratios(const NlsProblem& problem,
                                                      const std::vector<Vector>& points,
                                                      Execution exec) {
  if (!problem.has_distance()) {
    throw Error(ErrorCode::NoDistOracle, "problem '" + problem.name() + "' has no distance oracle");
  }
  const auto nan = std::numeric_limits<double>::quiet_NaN();
  const std::vector<double> raw = evaluate_points(
      points,
      [&](const Vector& x) {
        const double dist = *problem.distance(x);
        if (dist <= kDistFloor) return nan;
        return eval_gradient(problem, x).norm() / dist;
      },
      exec);
  std::vector<std::optional<double>> out;
  out.reserve(raw.size());
  for (double v : raw) out.push_back(std::isnan(v) ? std::nullopt : std::optional<double>(v));
  return out;
}

ErrorBoundReport probe_error_bound(const NlsProblem& problem, const Vector& center, double radius,
                                   std::size_t samples, std::uint64_t seed, Execution exec) {
  if (!problem.has_distance()) {
    throw Error(ErrorCode::NoDistOracle, "problem '" + problem.name() + "' has no distance oracle");
  }
  ErrorBoundReport report;
  report.center = center;
  report.radius = radius;
  report.seed = seed;
  report.samples = samples;
  const auto ratios = error_bound_ratios(problem, sample_ball(center, radius, samples, seed), exec);
  std::vector<double> kept;
  for (const auto& r : ratios) {
    if (r) kept.push_back(*r);
  }
  report.excluded = samples - kept.size();
  report.stats = stats_of(kept);
  return report;
}

LinearizationFit probe_linearization(const NlsProblem& problem,
                                     const std::vector<Vector>& stationary_points,
                                     const std::vector<Vector>& test_points) {
  struct Anchor {
    Vector z;
    DenseMatrix jz;
    Vector fz;
  };
  std::vector<Anchor> anchors;
  for (const auto& z : stationary_points) {
    const Vector f = problem.residual(z);
    const DenseMatrix j = problem.jacobian(z);
    if ((j.transpose() * f).norm() <= 1e-10) anchors.push_back({z, j, f});
  }
  if (anchors.empty()) {
    throw Error(ErrorCode::NoStationarySamples, "no sample passes the stationarity check");
  }

  LinearizationFit fit;
  fit.stationary_used = anchors.size();
  std::vector<double> log_dx;
  std::vector<double> log_lhs;
  std::vector<double> dxs;
  std::vector<double> lhss;
  for (const auto& a : anchors) {
    for (const auto& x : test_points) {
      const double dx = (x - a.z).norm();
      if (dx == 0.0) continue;
      ++fit.pairs_total;
      const DenseMatrix dj = problem.jacobian(x) - a.jz;
      const double lhs = (dj.transpose() * a.fz).norm();
      // Relative to the size of its factors the left side is roundoff.
      if (lhs <= kRankTolerance * spectral_norm(dj) * a.fz.norm()) continue;
      log_dx.push_back(std::log(dx));
      log_lhs.push_back(std::log(lhs));
      dxs.push_back(dx);
      lhss.push_back(lhs);
    }
  }
  fit.pairs_fitted = log_dx.size();
  if (fit.pairs_total > 0 && log_dx.empty()) {
    fit.degenerate_zero = true;
    fit.r = 1.0;
    fit.c = 0.0;
    return fit;
  }
  if (log_dx.size() < 2) {
    fit.no_fit = true;
    return fit;
  }

  const auto n = static_cast<double>(log_dx.size());
  double mx = 0.0;
  double my = 0.0;
  for (std::size_t i = 0; i < log_dx.size(); ++i) {
    mx += log_dx[i];
    my += log_lhs[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < log_dx.size(); ++i) {
    sxx += (log_dx[i] - mx) * (log_dx[i] - mx);
    sxy += (log_dx[i] - mx) * (log_lhs[i] - my);
  }
  if (sxx == 0.0) {
    fit.no_fit = true;
    return fit;
  }
  const double slope = sxy / sxx;
  const double intercept = my - slope * mx;
  fit.r = slope - 1.0;

  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < log_dx.size(); ++i) {
    const double resid = log_lhs[i] - (intercept + slope * log_dx[i]);
    lo = std::min(lo, resid);
    hi = std::max(hi, resid);
    fit.c = std::max(fit.c, lhss[i] / std::pow(dxs[i], slope));
  }
  fit.spread_decades = (hi - lo) / std::log(10.0);
  fit.no_fit = fit.spread_decades > 1.0 || !(fit.r > 0.0 && fit.r <= 1.5);
  return fit;
}

LipschitzReport probe_lipschitz(const NlsProblem& problem, const Vector& center, double radius,
                                std::size_t samples, std::uint64_t seed, Execution exec) {
  if (samples < 2) throw Error(ErrorCode::InvalidConfig, "Lipschitz probe needs at least 2 samples");
  LipschitzReport report;
  report.center = center;
  report.radius = radius;
  report.seed = seed;
  report.samples = samples;
  const std::vector<Vector> pts = sample_ball(center, radius, samples, seed);
  std::vector<DenseMatrix> jacobians(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) jacobians[i] = problem.jacobian(pts[i]);
  report.estimate = max_over_pairs(
      pts.size(),
      [&](std::size_t i, std::size_t k) {
        const double dx = (pts[i] - pts[k]).norm();
        if (dx == 0.0) return 0.0;
        return spectral_norm(jacobians[i] - jacobians[k]) / dx;
      },
      exec);
  report.estimate = std::max(report.estimate, 0.0);
  return report;
}

std::size_t CompletenessScan::violation_count() const {
  return static_cast<std::size_t>(std::count(violated.begin(), violated.end(), true));
}

double CompletenessScan::gamma_min() const {
  double best = std::numeric_limits<double>::infinity();
  for (double g : gamma) best = std::min(best, g);
  return best;
}

CompletenessScan completeness_scan(const NlsProblem& problem, const ScalingSpec& scaling,
                                   const Grid& grid, Execution exec) {
  if (static_cast<Eigen::Index>(grid.axes.size()) != problem.n()) {
    throw Error(ErrorCode::DimensionMismatch, "grid dimension differs from problem dimension");
  }
  const DenseMatrix& l = scaling.matrix();
  const double l_norm2 = std::pow(spectral_norm(l), 2);
  CompletenessScan scan;
  scan.grid = grid;
  scan.gamma = evaluate_grid(
      grid, [&](const Vector& x) { return completeness_gamma(problem.jacobian(x), l); }, exec);
  const std::vector<double> threshold = evaluate_grid(
      grid,
      [&](const Vector& x) {
        return kRankTolerance * (std::pow(spectral_norm(problem.jacobian(x)), 2) + l_norm2);
      },
      exec);
  scan.violated.resize(scan.gamma.size());
  for (std::size_t i = 0; i < scan.gamma.size(); ++i) scan.violated[i] = scan.gamma[i] <= threshold[i];
  return scan;
}

AssumptionReport assess_assumptions(const NlsProblem& problem, const ScalingSpec& scaling,
                                    const Vector& center, double radius, std::size_t samples,
                                    std::uint64_t seed, const std::vector<Vector>& stationary_points,
                                    Execution exec) {
  AssumptionReport report;
  report.center = center;
  report.radius = radius;
  report.seed = seed;
  report.sample_count = samples;
  const std::vector<Vector> pts = sample_ball(center, radius, samples, seed);
  const DenseMatrix& l = scaling.matrix();
  const std::vector<double> gammas =
      evaluate_points(pts, [&](const Vector& x) { return completeness_gamma(problem.jacobian(x), l); }, exec);
  report.gamma_min = *std::min_element(gammas.begin(), gammas.end());
  if (problem.has_distance()) {
    report.omega_ratio_stats = probe_error_bound(problem, center, radius, samples, seed, exec).stats;
  }
  report.lipschitz_estimate = probe_lipschitz(problem, center, radius, samples, seed, exec).estimate;
  if (!stationary_points.empty()) {
    report.linearization_fit = probe_linearization(problem, stationary_points, pts);
  }
  return report;
}

AuditReport audit_trace(const SolveTrace& trace, const NlsProblem& problem,
                        const ScalingSpec& scaling) {
  constexpr double kRel = 1e-8;
  AuditReport report;
  const DenseMatrix& l = scaling.matrix();
  for (const auto& rec : trace.records) {
    if (rec.direction.size() == 0) continue;
    const DenseMatrix j = problem.jacobian(rec.x);
    const Vector g = j.transpose() * problem.residual(rec.x);
    const Vector& d = rec.direction;
    const double lambda = rec.lambda;
    const double descent = -g.dot(d);
    const double slack = 1e-14 * g.norm() * d.norm();

    const double gamma = completeness_gamma(j, l);
    if (gamma <= kAuditGammaFloor) {
      ++report.skipped;
      // The safeguard inequalities do not depend on gamma.
      if (rec.dir_kind == DirectionKind::scaled) continue;
    } else {
      GsvdFactors f;
      try {
        f = gsvd(j, l);
      } catch (const Error&) {
        ++report.skipped;
        continue;
      }
      ++report.audited;
      const double x_norm = spectral_norm(f.x);
      const double x_bound = 1.0 / std::sqrt(gamma);
      if (x_norm > x_bound * (1.0 + kRel)) report.violations.push_back({rec.k, "X-norm", x_norm, x_bound});

      const double gb = gamma_block_norm(f, lambda);
      const double gb_bound = std::max(1.0, 1.0 / lambda);
      if (gb > gb_bound * (1.0 + kRel)) report.violations.push_back({rec.k, "Gamma-bound", gb, gb_bound});

      if (rec.dir_kind == DirectionKind::scaled) {
        const double need = gamma * std::min(1.0, lambda) * d.squaredNorm();
        if (descent < need * (1.0 - kRel) - slack) {
          report.violations.push_back({rec.k, "angle", descent, need});
        }
      }
    }

    if (rec.dir_kind == DirectionKind::safeguard_lm) {
      const double need = lambda * d.squaredNorm();
      if (descent < need * (1.0 - kRel) - slack) {
        report.violations.push_back({rec.k, "safeguard-descent", descent, need});
      }
      const double cap = g.norm() / lambda;
      if (d.norm() > cap * (1.0 + kRel)) report.violations.push_back({rec.k, "safeguard-norm", d.norm(), cap});
    }
  }
  return report;
}

MonotoneReport phi_monotonicity(const SolveTrace& trace) {
  MonotoneReport out;
  for (std::size_t i = 0; i + 1 < trace.records.size(); ++i) {
    const IterateRecord& rec = trace.records[i];
    if (!rec.has_step) continue;
    ++out.steps;
    if (trace.records[i + 1].phi < rec.phi) continue;
    (rec.full_step_accepted ? out.full_step_increases : out.armijo_increases).push_back(rec.k);
  }
  return out;
}

}  // namespace lmmss
