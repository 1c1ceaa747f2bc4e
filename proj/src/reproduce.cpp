#include "lmmss/reproduce.hpp"

#include "lmmss/error.hpp"
#include "lmmss/io.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <ostream>

namespace lmmss {

bool matches_significant(double computed, double reference, int digits) {
  if (!std::isfinite(computed) || reference == 0.0) return false;
  const double exponent = std::floor(std::log10(std::abs(reference)));
  const double half_unit = 0.5 * std::pow(10.0, exponent - (digits - 1));
  return std::abs(computed - reference) <= half_unit;
}

bool matches_order_of_magnitude(double computed, double reference) {
  if (!(computed > 0.0) || !(reference > 0.0) || !std::isfinite(computed)) return false;
  return std::abs(std::log10(computed / reference)) <= 1.0;
}

std::string_view to_string(Quantity q) {
  switch (q) {
    case Quantity::grad_norm: return "grad_norm";
    case Quantity::dist: return "dist";
    case Quantity::surrogate_dist: return "surrogate_dist";
  }
  return "dist";
}

bool ReproduceOutcome::pass() const {
  const bool cols = std::all_of(columns.begin(), columns.end(), [](const auto& c) { return c.pass; });
  const bool rest = std::all_of(checks.begin(), checks.end(), [](const auto& c) { return c.pass; });
  return cols && rest;
}

std::vector<std::string> reproduce_targets() { return {"table1", "table2", "table3", "fig1", "fig2"}; }

ColumnCheck compare_column(const ReferenceColumn& column, const SolveTrace& trace) {
  ColumnCheck check;
  check.column = column;
  check.pass = true;
  for (std::size_t i = 0; i < column.values.size(); ++i) {
    ColumnRow row;
    row.k = column.first_k + static_cast<int>(i);
    row.reference = column.values[i];
    row.significant_rule = std::abs(row.reference) >= column.sig_floor;
    const auto rec = std::find_if(trace.records.begin(), trace.records.end(),
                                  [&](const IterateRecord& r) { return r.k == row.k; });
    if (rec != trace.records.end()) {
      switch (column.quantity) {
        case Quantity::grad_norm: row.computed = rec->grad_norm; break;
        case Quantity::dist: row.computed = rec->dist; break;
        case Quantity::surrogate_dist: row.computed = rec->surrogate_dist; break;
      }
    }
    if (row.computed) {
      row.pass = row.significant_rule ? matches_significant(*row.computed, row.reference)
                                      : matches_order_of_magnitude(*row.computed, row.reference);
    }
    check.pass = check.pass && row.pass;
    check.rows.push_back(row);
  }
  return check;
}

namespace {

NamedTrace run(std::string id, const BuiltinProblem& bp, bool identity_scaling, const Vector& x0,
               const SolverConfig& config) {
  const ScalingSpec scaling = identity_scaling ? ScalingSpec::identity(bp.problem.n()) : bp.scaling;
  NamedTrace t;
  t.id = std::move(id);
  t.problem = bp.problem.name();
  t.scaling = identity_scaling ? "identity" : "builtin";
  t.config = config;
  t.trace = solve(bp.problem, scaling, x0, config);
  return t;
}

SolverConfig pure_config(double grad_tol) {
  SolverConfig c;
  c.mode = SolveMode::pure;
  c.grad_tol = grad_tol;
  return c;
}

NamedCheck iteration_check(const NamedTrace& t, int expected) {
  const int got = t.trace.iterations();
  return {t.id + " iterations == " + std::to_string(expected), got == expected,
          "status " + std::string(to_string(t.trace.status)) + ", " + std::to_string(got) + " iterations"};
}

NamedCheck status_check(const NamedTrace& t, SolveStatus expected) {
  return {t.id + " status " + std::string(to_string(expected)), t.trace.status == expected,
          "got " + std::string(to_string(t.trace.status))};
}

LevelData level_data(const NlsProblem& problem, const std::vector<NamedTrace>& runs) {
  Vector lo = runs.front().trace.final_x;
  Vector hi = lo;
  for (const auto& r : runs) {
    for (const auto& rec : r.trace.records) {
      lo = lo.cwiseMin(rec.x);
      hi = hi.cwiseMax(rec.x);
    }
  }
  constexpr double kMargin = 0.5;
  constexpr int kPoints = 200;
  LevelData levels;
  for (Eigen::Index d = 0; d < lo.size(); ++d) {
    const double a = lo(d) - kMargin;
    const double b = hi(d) + kMargin;
    levels.grid.axes.push_back({a, b, (b - a) / (kPoints - 1)});
  }
  levels.phi = evaluate_grid(levels.grid, [&](const Vector& x) { return eval_phi(problem, x); });
  return levels;
}

ReproduceOutcome table1() {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  ReproduceOutcome out;
  out.target = "table1";
  const SolverConfig config = pure_config(1e-8);
  out.runs.push_back(run("left", ex1, false, ex1.starts[0], config));
  out.runs.push_back(run("right", ex1, false, ex1.starts[1], config));
  constexpr double kRoundoff = 1e-12;
  const std::vector<ReferenceColumn> refs = {
      {"left dist (|x1^2+x2^2-5|)", "left", Quantity::surrogate_dist, 0,
       {1.3506e-1, 1.7762e-2, 3.2402e-7, 1.1546e-14}, kRoundoff},
      {"left ||J^T F||", "left", Quantity::grad_norm, 0, {1.2242, 1.5890e-1, 2.8982e-6, 1.0659e-13}, kRoundoff},
      {"right dist (|x1^2+x2^2-5|)", "right", Quantity::surrogate_dist, 0,
       {4.4521e-2, 1.9821e-4, 3.8598e-9}, kRoundoff},
      {"right ||J^T F||", "right", Quantity::grad_norm, 0, {3.9643e-1, 1.7729e-3, 3.4523e-8}, kRoundoff},
  };
  out.columns.push_back(compare_column(refs[0], out.runs[0].trace));
  out.columns.push_back(compare_column(refs[1], out.runs[0].trace));
  out.columns.push_back(compare_column(refs[2], out.runs[1].trace));
  out.columns.push_back(compare_column(refs[3], out.runs[1].trace));
  out.checks.push_back(iteration_check(out.runs[0], 3));
  out.checks.push_back(iteration_check(out.runs[1], 2));
  return out;
}

ReproduceOutcome table2() {
  const BuiltinProblem ex2 = builtin_problem("ex2");
  ReproduceOutcome out;
  out.target = "table2";
  const SolverConfig config = pure_config(1e-10);
  out.runs.push_back(run("lmm", ex2, true, ex2.starts[0], config));
  out.runs.push_back(run("lmmss", ex2, false, ex2.starts[0], config));
  out.columns.push_back(compare_column(
      {"LMM |x1|", "lmm", Quantity::dist, 1, {3.7143e-1, 6.0270e-2, 1.0055e-3, 2.4684e-7, 1.4833e-14}, 1e-7},
      out.runs[0].trace));
  out.columns.push_back(compare_column(
      {"LMMSS |x1|", "lmmss", Quantity::dist, 1, {1.5307e-1, 1.3438e-2, 1.7991e-4, 3.0097e-8, 7.5482e-16}, 1e-7},
      out.runs[1].trace));
  for (const auto& r : out.runs) {
    out.checks.push_back(status_check(r, SolveStatus::converged));
    out.checks.push_back({r.id + " dist oracle applicable", r.trace.dist_applicable, ""});
  }
  return out;
}

ReproduceOutcome table3() {
  const BuiltinProblem ex3 = builtin_problem("ex3");
  ReproduceOutcome out;
  out.target = "table3";
  const SolverConfig config = pure_config(1e-10);
  out.runs.push_back(run("start1", ex3, false, ex3.starts[0], config));
  out.runs.push_back(run("start2", ex3, false, ex3.starts[1], config));
  out.columns.push_back(compare_column({"||x|| from (3,3)", "start1", Quantity::dist, 1,
                                        {2.0097, 8.0542e-1, 1.5845e-1, 1.9403e-3, 3.6524e-9, 7.4734e-17},
                                        1e-8},
                                       out.runs[0].trace));
  out.columns.push_back(compare_column({"||x|| from (-2,-2)", "start2", Quantity::dist, 1,
                                        {1.2571, 3.8494e-1, 2.4840e-2, 7.6586e-6, 2.6331e-16}, 1e-8},
                                       out.runs[1].trace));
  for (const auto& r : out.runs) {
    double worst = 0.0;
    for (const auto& rec : r.trace.records) worst = std::max(worst, std::abs(rec.x(0) - rec.x(1)));
    out.checks.push_back({r.id + " iterates stay in span{(1,1)}", worst <= 1e-12,
                          "max |x1 - x2| = " + format_double(worst)});
    out.checks.push_back(status_check(r, SolveStatus::converged));
  }
  return out;
}

ReproduceOutcome fig1() {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  ReproduceOutcome out;
  out.target = "fig1";
  const SolverConfig config;
  out.runs.push_back(run("lmm", ex1, true, ex1.starts[2], config));
  out.runs.push_back(run("lmmss", ex1, false, ex1.starts[2], config));
  for (const auto& r : out.runs) {
    out.checks.push_back(status_check(r, SolveStatus::converged));
    const double s = *r.trace.records.back().surrogate_dist;
    out.checks.push_back({r.id + " limit on the stationary circle", s < 1e-6,
                          "|x1^2+x2^2-5| = " + format_double(s)});
  }
  const double gap = (out.runs[0].trace.final_x - out.runs[1].trace.final_x).norm();
  out.checks.push_back({"limit points differ", gap > 1e-3, "distance " + format_double(gap)});
  out.levels = level_data(ex1.problem, out.runs);
  return out;
}

ReproduceOutcome fig2() {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  ReproduceOutcome out;
  out.target = "fig2";
  SolverConfig bare;
  bare.safeguard = false;
  out.runs.push_back(run("no-safeguard", ex1, false, ex1.starts[3], bare));
  SolverConfig capped;
  capped.m_cap = 1.0;
  out.runs.push_back(run("safeguard", ex1, false, ex1.starts[3], capped));

  const SolveTrace& stalled = out.runs[0].trace;
  out.checks.push_back(status_check(out.runs[0], SolveStatus::linesearch_failure));
  const double off_line = std::abs(stalled.final_x(0) + stalled.final_x(1));
  out.checks.push_back({"stall point near x2 = -x1", off_line < 0.05, "|x1 + x2| = " + format_double(off_line)});
  const double gamma = completeness_gamma(ex1.problem.jacobian(stalled.final_x), ex1.scaling.matrix());
  out.checks.push_back({"completeness fails at stall point", gamma < 1e-3, "gamma = " + format_double(gamma)});

  out.checks.push_back(status_check(out.runs[1], SolveStatus::converged));
  const double s = *out.runs[1].trace.records.back().surrogate_dist;
  out.checks.push_back({"safeguarded run reaches the stationary circle", s < 1e-6,
                        "|x1^2+x2^2-5| = " + format_double(s)});
  out.levels = level_data(ex1.problem, out.runs);
  return out;
}

}  // namespace

ReproduceOutcome reproduce(std::string_view target) {
  if (target == "table1") return table1();
  if (target == "table2") return table2();
  if (target == "table3") return table3();
  if (target == "fig1") return fig1();
  if (target == "fig2") return fig2();
  throw Error(ErrorCode::InvalidConfig, "unknown reproduce target '" + std::string(target) + "'");
}

void write_reproduce_report(std::ostream& out, const ReproduceOutcome& outcome) {
  out << "target: " << outcome.target << '\n';
  for (const auto& r : outcome.runs) {
    out << "run " << r.id << ": problem " << r.problem << ", scaling " << r.scaling << ", mode "
        << to_string(r.config.mode) << ", safeguard " << (r.config.safeguard ? "on" : "off")
        << ", x0 " << (r.trace.records.empty() ? std::string("?") : format_vector(r.trace.records.front().x, ','))
        << ", status " << to_string(r.trace.status) << ", iterations " << r.trace.iterations()
        << ", final x " << format_vector(r.trace.final_x, ',') << '\n';
  }
  for (const auto& c : outcome.columns) {
    out << '\n' << "column " << c.column.label << " [" << to_string(c.column.quantity) << "]\n";
    out << "k,reference,computed,rule,result\n";
    for (const auto& row : c.rows) {
      out << row.k << ',' << format_double(row.reference) << ','
          << (row.computed ? format_double(*row.computed) : std::string("missing")) << ','
          << (row.significant_rule ? "3-sig-digits" : "order-of-magnitude") << ','
          << (row.pass ? "pass" : "fail") << '\n';
    }
  }
  if (outcome.target == "table1") {
    // Both distance definitions, for the record.
    out << "\ndistance definitions (k, |x1^2+x2^2-5|, | ||x|| - sqrt(5) |)\n";
    for (const auto& r : outcome.runs) {
      for (const auto& rec : r.trace.records) {
        out << r.id << ',' << rec.k << ',' << format_double(rec.surrogate_dist.value_or(0.0)) << ','
            << format_double(rec.dist.value_or(0.0)) << '\n';
      }
    }
  }
  if (!outcome.checks.empty()) out << "\nchecks\n";
  for (const auto& c : outcome.checks) {
    out << (c.pass ? "pass" : "fail") << ": " << c.name;
    if (!c.detail.empty()) out << " (" << c.detail << ')';
    out << '\n';
  }
  out << "\nVERDICT: " << (outcome.pass() ? "pass" : "fail") << '\n';
}

void write_reproduce_artifacts(const std::filesystem::path& dir, const ReproduceOutcome& outcome) {
  std::filesystem::create_directories(dir);
  auto open = [&](const std::string& name) {
    std::ofstream f(dir / name, std::ios::binary);
    if (!f) throw Error(ErrorCode::InvalidConfig, "cannot write " + (dir / name).string());
    return f;
  };
  {
    auto f = open(outcome.target + "_report.txt");
    write_reproduce_report(f, outcome);
  }
  const bool figure = outcome.levels.has_value();
  for (const auto& r : outcome.runs) {
    auto f = open(outcome.target + "_" + r.id + ".csv");
    write_trace_csv(f, r.trace);
    if (figure) {
      auto t = open(outcome.target + "_" + r.id + "_trajectory.csv");
      write_trajectory_csv(t, r.trace);
    }
  }
  if (figure) {
    auto f = open(outcome.target + "_levels.csv");
    write_grid_csv(f, outcome.levels->grid, outcome.levels->phi, "phi");
  }
}

}  // namespace lmmss
