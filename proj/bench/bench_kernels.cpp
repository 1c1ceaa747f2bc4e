#include "lmmss/diagnostics.hpp"
#include "lmmss/kernels.hpp"
#include "lmmss/problem.hpp"

#include <benchmark/benchmark.h>

namespace {

using namespace lmmss;

Execution exec_of(const benchmark::State& state) {
  return state.range(0) == 0 ? Execution::serial : Execution::parallel;
}

void label(benchmark::State& state) {
  state.SetLabel(state.range(0) == 0 ? "serial" : "openmp x" + std::to_string(max_threads()));
}

void BM_CompletenessScan(benchmark::State& state) {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  Grid grid;
  grid.axes.assign(2, GridAxis{-3.0, 3.0, 0.02});
  for (auto _ : state) {
    auto scan = completeness_scan(ex1.problem, ex1.scaling, grid, exec_of(state));
    benchmark::DoNotOptimize(scan.gamma.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(grid.size()));
  label(state);
}
BENCHMARK(BM_CompletenessScan)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_ErrorBoundProbe(benchmark::State& state) {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  Vector c(2);
  c << 0.0, 2.236;
  for (auto _ : state) {
    auto r = probe_error_bound(ex1.problem, c, 0.5, 20000, 7, exec_of(state));
    benchmark::DoNotOptimize(r.stats.mean);
  }
  label(state);
}
BENCHMARK(BM_ErrorBoundProbe)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LipschitzProbe(benchmark::State& state) {
  const BuiltinProblem ex3 = builtin_problem("ex3");
  Vector c = Vector::Zero(2);
  for (auto _ : state) {
    auto r = probe_lipschitz(ex3.problem, c, 1.0, 600, 3, exec_of(state));
    benchmark::DoNotOptimize(r.estimate);
  }
  label(state);
}
BENCHMARK(BM_LipschitzProbe)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_LevelGrid(benchmark::State& state) {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  Grid grid;
  grid.axes.assign(2, GridAxis{-3.0, 5.0, 8.0 / 199.0});
  for (auto _ : state) {
    auto v = evaluate_grid(grid, [&](const Vector& x) { return eval_phi(ex1.problem, x); }, exec_of(state));
    benchmark::DoNotOptimize(v.data());
  }
  label(state);
}
BENCHMARK(BM_LevelGrid)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
