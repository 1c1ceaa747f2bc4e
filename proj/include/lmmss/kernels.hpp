#pragma once

// Data-parallel evaluation kernels used by the diagnostics. Each kernel has an
// OpenMP path and a serial reference path; both write results by index and
// reduce in index order, so their outputs are bitwise identical.

#include "lmmss/linalg.hpp"

#include <cstddef>
#include <cstdint>
#include <functional>
#include <vector>

namespace lmmss {

enum class Execution { serial, parallel };

struct GridAxis {
  double lo = 0.0;
  double hi = 0.0;
  double step = 1.0;

  /// Points lo, lo + step, ..., up to hi (inclusive within half a step).
  std::size_t count() const;
  double at(std::size_t i) const { return lo + static_cast<double>(i) * step; }
};

/// Cartesian grid; the last axis varies fastest.
struct Grid {
  std::vector<GridAxis> axes;

  std::size_t size() const;
  Vector point(std::size_t flat_index) const;
};

using PointFn = std::function<double(const Vector&)>;
using PairFn = std::function<double(std::size_t, std::size_t)>;

std::vector<double> evaluate_points(const std::vector<Vector>& points, const PointFn& fn,
                                    Execution exec = Execution::parallel);

std::vector<double> evaluate_grid(const Grid& grid, const PointFn& fn,
                                  Execution exec = Execution::parallel);

/// Maximum of fn(i, k) over all index pairs i < k < count; -inf for count < 2.
double max_over_pairs(std::size_t count, const PairFn& fn, Execution exec = Execution::parallel);

/// Uniform samples in the Euclidean ball B(center, radius), drawn from a
/// 64-bit Mersenne Twister seeded with seed.
std::vector<Vector> sample_ball(const Vector& center, double radius, std::size_t count,
                                std::uint64_t seed);

int max_threads();

}  // namespace lmmss
