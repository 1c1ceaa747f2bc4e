#include "lmmss/diagnostics.hpp"
#include "lmmss/error.hpp"
#include "lmmss/kernels.hpp"

#include "doctest.h"

#include <cmath>
#include <cstring>
#include <stdexcept>

using namespace lmmss;

namespace {

bool same_bits(const std::vector<double>& a, const std::vector<double>& b) {
  return a.size() == b.size() && std::memcmp(a.data(), b.data(), a.size() * sizeof(double)) == 0;
}

}  // namespace

TEST_CASE("grid layout") {
  Grid g;
  g.axes = {GridAxis{0.0, 1.0, 0.5}, GridAxis{-1.0, 1.0, 1.0}};
  CHECK(g.axes[0].count() == 3);
  CHECK(g.size() == 9);
  CHECK(g.point(0) == (Vector(2) << 0.0, -1.0).finished());
  CHECK(g.point(1) == (Vector(2) << 0.0, 0.0).finished());
  CHECK(g.point(8) == (Vector(2) << 1.0, 1.0).finished());
  // a step that does not divide the span evenly rounds to the nearest count
  CHECK((GridAxis{-3.0, 3.0, 0.05}).count() == 121);
  CHECK(Grid{}.size() == 0);
  CHECK_THROWS_AS((GridAxis{1.0, 0.0, 0.1}).count(), Error);
  CHECK_THROWS_AS((GridAxis{0.0, 1.0, 0.0}).count(), Error);
}

TEST_CASE("serial and parallel evaluation agree bitwise") {
  Grid g;
  g.axes.assign(2, GridAxis{-2.0, 2.0, 0.01});
  const PointFn fn = [](const Vector& x) { return std::sin(x(0)) * std::exp(x(1)) + x.squaredNorm(); };
  CHECK(same_bits(evaluate_grid(g, fn, Execution::serial), evaluate_grid(g, fn, Execution::parallel)));

  const auto pts = sample_ball(Vector::Zero(3), 1.0, 1000, 42);
  const PointFn norm = [](const Vector& x) { return x.norm(); };
  CHECK(same_bits(evaluate_points(pts, norm, Execution::serial), evaluate_points(pts, norm, Execution::parallel)));

  const PairFn pair = [&](std::size_t i, std::size_t k) { return (pts[i] - pts[k]).norm(); };
  const double s = max_over_pairs(pts.size(), pair, Execution::serial);
  const double p = max_over_pairs(pts.size(), pair, Execution::parallel);
  CHECK(std::memcmp(&s, &p, sizeof s) == 0);
  CHECK(s <= 2.0);
}

TEST_CASE("max over pairs visits every pair once") {
  std::vector<int> seen(10 * 10, 0);
  const double m = max_over_pairs(
      10, [&](std::size_t i, std::size_t k) {
        ++seen[i * 10 + k];
        return static_cast<double>(i * 10 + k);
      },
      Execution::serial);
  CHECK(m == 89.0);
  for (std::size_t i = 0; i < 10; ++i)
    for (std::size_t k = 0; k < 10; ++k) CHECK(seen[i * 10 + k] == (k > i ? 1 : 0));
}

TEST_CASE("diagnostic probes agree across execution modes") {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  Vector c(2);
  c << 0.0, 2.236;
  const auto es = probe_error_bound(ex1.problem, c, 0.5, 300, 7, Execution::serial);
  const auto ep = probe_error_bound(ex1.problem, c, 0.5, 300, 7, Execution::parallel);
  CHECK(es.stats.min == ep.stats.min);
  CHECK(es.stats.mean == ep.stats.mean);
  CHECK(probe_lipschitz(ex1.problem, c, 0.5, 100, 1, Execution::serial).estimate ==
        probe_lipschitz(ex1.problem, c, 0.5, 100, 1, Execution::parallel).estimate);
  Grid g;
  g.axes.assign(2, GridAxis{-3.0, 3.0, 0.1});
  const auto ss = completeness_scan(ex1.problem, ex1.scaling, g, Execution::serial);
  const auto sp = completeness_scan(ex1.problem, ex1.scaling, g, Execution::parallel);
  CHECK(same_bits(ss.gamma, sp.gamma));
  CHECK(ss.violated == sp.violated);
}

TEST_CASE("exceptions surface from either path") {
  const std::vector<Vector> pts(64, Vector::Zero(1));
  const auto thrower = [](const Vector&) -> double { throw std::runtime_error("boom"); };
  CHECK_THROWS_AS(evaluate_points(pts, thrower, Execution::serial), std::runtime_error);
  CHECK_THROWS_AS(evaluate_points(pts, thrower, Execution::parallel), std::runtime_error);
}

TEST_CASE("ball sampling") {
  Vector c(2);
  c << 1.0, -1.0;
  const auto a = sample_ball(c, 0.5, 500, 9);
  const auto b = sample_ball(c, 0.5, 500, 9);
  const auto other = sample_ball(c, 0.5, 500, 10);
  REQUIRE(a.size() == 500);
  double mean_r = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK((a[i] - c).norm() <= 0.5);
    CHECK(a[i] == b[i]);
    mean_r += (a[i] - c).norm();
  }
  CHECK(a[0] != other[0]);
  // E|x - c| = 2r/3 for the uniform disk
  CHECK(mean_r / 500.0 == doctest::Approx(1.0 / 3.0).epsilon(0.05));
  CHECK_THROWS_AS(sample_ball(c, 0.0, 5, 1), Error);
  CHECK(max_threads() >= 1);
}
