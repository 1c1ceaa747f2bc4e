#include "lmmss/kernels.hpp"

#include "lmmss/error.hpp"

#include <omp.h>

#include <cmath>
#include <exception>
#include <limits>
#include <random>

namespace lmmss {

std::size_t GridAxis::count() const {
  if (!(step > 0.0) || !(hi >= lo) || !std::isfinite(lo) || !std::isfinite(hi)) {
    throw Error(ErrorCode::InvalidConfig, "grid axis needs lo <= hi and step > 0");
  }
  return static_cast<std::size_t>(std::floor((hi - lo) / step + 0.5)) + 1;
}

std::size_t Grid::size() const {
  if (axes.empty()) return 0;
  std::size_t total = 1;
  for (const auto& axis : axes) total *= axis.count();
  return total;
}

Vector Grid::point(std::size_t flat_index) const {
  const auto n = static_cast<Eigen::Index>(axes.size());
  Vector x(n);
  for (Eigen::Index d = n - 1; d >= 0; --d) {
    const auto& axis = axes[static_cast<std::size_t>(d)];
    const std::size_t c = axis.count();
    x(d) = axis.at(flat_index % c);
    flat_index /= c;
  }
  return x;
}

namespace {

// Runs body(i) for i in [0, count), capturing the first exception by index so
// the serial and parallel paths fail identically.
template <class Body>
void for_each_index(std::size_t count, Execution exec, Body&& body) {
  std::vector<std::exception_ptr> errors(count);
  const auto n = static_cast<std::int64_t>(count);
  if (exec == Execution::parallel) {
#pragma omp parallel for schedule(static)
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  } else {
    for (std::int64_t i = 0; i < n; ++i) {
      try {
        body(static_cast<std::size_t>(i));
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

}  // namespace

std::vector<double> evaluate_points(const std::vector<Vector>& points, const PointFn& fn,
                                    Execution exec) {
  std::vector<double> out(points.size());
  for_each_index(points.size(), exec, [&](std::size_t i) { out[i] = fn(points[i]); });
  return out;
}

std::vector<double> evaluate_grid(const Grid& grid, const PointFn& fn, Execution exec) {
  std::vector<double> out(grid.size());
  for_each_index(out.size(), exec, [&](std::size_t i) { out[i] = fn(grid.point(i)); });
  return out;
}

double max_over_pairs(std::size_t count, const PairFn& fn, Execution exec) {
  // Row maxima first, then a serial pass.
  std::vector<double> row_max(count, -std::numeric_limits<double>::infinity());
  for_each_index(count, exec, [&](std::size_t i) {
    double best = -std::numeric_limits<double>::infinity();
    for (std::size_t k = i + 1; k < count; ++k) best = std::max(best, fn(i, k));
    row_max[i] = best;
  });
  double best = -std::numeric_limits<double>::infinity();
  for (double v : row_max) best = std::max(best, v);
  return best;
}

std::vector<Vector> sample_ball(const Vector& center, double radius, std::size_t count,
                                std::uint64_t seed) {
  if (!(radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "sampling radius must be positive");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  const Eigen::Index n = center.size();
  std::vector<Vector> out;
  out.reserve(count);
  while (out.size() < count) {
    Vector dir(n);
    for (Eigen::Index i = 0; i < n; ++i) dir(i) = normal(rng);
    const double len = dir.norm();
    if (len == 0.0) continue;
    const double rho = radius * std::pow(uniform(rng), 1.0 / static_cast<double>(n));
    out.push_back(center + (rho / len) * dir);
  }
  return out;
}

int max_threads() { return omp_get_max_threads(); }

}  // namespace lmmss
