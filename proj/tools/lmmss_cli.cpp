#include "lmmss/diagnostics.hpp"
#include "lmmss/error.hpp"
#include "lmmss/io.hpp"
#include "lmmss/problem.hpp"
#include "lmmss/reproduce.hpp"
#include "lmmss/solver.hpp"

#include "CLI11.hpp"

#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

namespace {

using namespace lmmss;

enum Exit { kOk = 0, kNumerical = 1, kMaxIters = 2, kLinesearch = 3, kConfig = 4 };

struct RunOptions {
  std::string problem = "ex1";
  std::string mode = "globalized";
  std::string x0;
  std::string scaling = "builtin";
  std::string csv = "-";
  std::string report;
  SolverConfig solver;
  bool no_safeguard = false;
};

struct ReproduceOptions {
  std::string target;
  std::string out_dir = ".";
};

struct ProbeOptions {
  std::string problem = "ex1";
  std::string what;
  std::string center;
  std::string scaling = "builtin";
  double radius = 0.5;
  std::size_t samples = 200;
  std::uint64_t seed = 0;
  std::string grid = "-3:3:0.05";
  std::string out = "-";
  bool serial = false;
};

// "-" means stdout.
class Sink {
 public:
  explicit Sink(const std::string& path) {
    if (path.empty() || path == "-") return;
    file_ = std::make_unique<std::ofstream>(path, std::ios::binary);
    if (!*file_) throw Error(ErrorCode::InvalidConfig, "cannot open '" + path + "' for writing");
  }
  std::ostream& stream() { return file_ ? *file_ : std::cout; }

 private:
  std::unique_ptr<std::ofstream> file_;
};

void add_solver_flags(CLI::App* cmd, SolverConfig& c, bool& no_safeguard) {
  cmd->add_option("--nu", c.nu, "Armijo slope fraction")->capture_default_str();
  cmd->add_option("--zeta", c.zeta, "backtracking factor")->capture_default_str();
  cmd->add_option("--vartheta", c.vartheta, "full-step gradient reduction")->capture_default_str();
  cmd->add_option("--theta", c.theta, "angle test constant")->capture_default_str();
  cmd->add_option("--m-cap", c.m_cap, "direction norm cap")->capture_default_str();
  cmd->add_option("--lambda-exponent", c.lambda_exponent, "r in lambda = ||J^T F||^r")->capture_default_str();
  cmd->add_option("--grad-tol", c.grad_tol, "stop when ||J^T F|| <= grad-tol")->capture_default_str();
  cmd->add_option("--max-iters", c.max_iters)->capture_default_str();
  cmd->add_option("--max-backtracks", c.max_backtracks)->capture_default_str();
  cmd->add_flag("--no-safeguard", no_safeguard, "never fall back to the classic LM direction");
}

int exit_for(SolveStatus status) {
  switch (status) {
    case SolveStatus::converged: return kOk;
    case SolveStatus::max_iters: return kMaxIters;
    case SolveStatus::linesearch_failure: return kLinesearch;
    case SolveStatus::numerical_error: return kNumerical;
  }
  return kNumerical;
}

// Config-level failures are separated from evaluation failures before any
// computation starts.
struct PreparedRun {
  BuiltinProblem builtin;
  ScalingSpec scaling;
  Vector x0;
  SolverConfig config;
};

PreparedRun prepare_run(const RunOptions& o) {
  BuiltinProblem bp = builtin_problem(o.problem);
  SolverConfig config = o.solver;
  const auto mode = parse_solve_mode(o.mode);
  if (!mode) throw Error(ErrorCode::InvalidConfig, "unknown mode '" + o.mode + "'");
  config.mode = *mode;
  config.safeguard = !o.no_safeguard;
  config.validate();
  const Eigen::Index n = bp.problem.n();
  ScalingSpec scaling = parse_scaling(o.scaling, n, bp.scaling);
  Vector x0 = o.x0.empty() ? bp.starts.front() : parse_vector(o.x0);
  if (x0.size() != n) {
    throw Error(ErrorCode::InvalidConfig, "x0 has " + std::to_string(x0.size()) + " entries, problem " +
                                              o.problem + " needs " + std::to_string(n));
  }
  return {std::move(bp), std::move(scaling), std::move(x0), config};
}

int cmd_run(const RunOptions& o) {
  std::optional<PreparedRun> prep;
  std::optional<Sink> csv;
  std::optional<Sink> report;
  try {
    prep = prepare_run(o);
    csv.emplace(o.csv);
    if (!o.report.empty()) report.emplace(o.report);
  } catch (const Error& e) {
    std::cerr << "lmmss run: " << e.what() << '\n';
    return kConfig;
  }
  const SolveTrace trace = solve(prep->builtin.problem, prep->scaling, prep->x0, prep->config);
  write_trace_csv(csv->stream(), trace);

  std::ostream& rout = report ? report->stream() : std::cerr;
  ReportWriter w(rout);
  write_run_summary(w, prep->builtin.problem, trace, prep->config);
  const ScalingSpec audit_scaling = prep->config.mode == SolveMode::classic_lm
                                        ? ScalingSpec::identity(prep->builtin.problem.n())
                                        : prep->scaling;
  try {
    write_audit(w, audit_trace(trace, prep->builtin.problem, audit_scaling));
  } catch (const Error& e) {
    w.section("audit");
    w.kv("error", std::string_view(e.what()));
  }
  write_monotonicity(w, phi_monotonicity(trace));
  return exit_for(trace.status);
}

int cmd_reproduce(const ReproduceOptions& o) {
  std::vector<std::string> targets;
  if (o.target == "all") {
    targets = reproduce_targets();
  } else {
    targets.push_back(o.target);
  }
  bool all_pass = true;
  for (const auto& t : targets) {
    ReproduceOutcome outcome;
    try {
      outcome = reproduce(t);
      write_reproduce_artifacts(o.out_dir, outcome);
    } catch (const Error& e) {
      std::cerr << "lmmss reproduce: " << e.what() << '\n';
      return e.code() == ErrorCode::InvalidConfig ? kConfig : kNumerical;
    }
    write_reproduce_report(std::cout, outcome);
    all_pass = all_pass && outcome.pass();
  }
  return all_pass ? kOk : kNumerical;
}

// Stationary points for the linearization probe: limits of tight classic LM
// runs started from the probe samples.
std::vector<Vector> stationary_points_near(const NlsProblem& problem, const std::vector<Vector>& starts) {
  SolverConfig c;
  c.grad_tol = 1e-13;
  c.max_iters = 500;
  std::vector<Vector> out;
  for (const auto& x : starts) {
    const SolveTrace t = classic_lm_solve(problem, x, c);
    if (!t.records.empty() && t.records.back().grad_norm <= 1e-10) out.push_back(t.final_x);
  }
  return out;
}

int cmd_probe(const ProbeOptions& o) {
  const std::vector<std::string> known = {"error-bound", "lipschitz", "linearization", "completeness", "all"};
  std::optional<BuiltinProblem> bp;
  std::optional<ScalingSpec> scaling;
  Vector center;
  Grid grid;
  std::optional<Sink> out;
  try {
    if (std::find(known.begin(), known.end(), o.what) == known.end()) {
      throw Error(ErrorCode::InvalidConfig, "unknown probe '" + o.what + "'");
    }
    bp = builtin_problem(o.problem);
    const Eigen::Index n = bp->problem.n();
    scaling = parse_scaling(o.scaling, n, bp->scaling);
    center = o.center.empty() ? bp->starts.front() : parse_vector(o.center);
    if (center.size() != n) throw Error(ErrorCode::InvalidConfig, "center length does not match problem");
    if (!(o.radius > 0.0)) throw Error(ErrorCode::InvalidConfig, "radius must be positive");
    if ((o.what == "error-bound" || o.what == "all") && !bp->problem.has_distance()) {
      throw Error(ErrorCode::NoDistOracle, "problem " + o.problem + " has no distance oracle");
    }
    const GridAxis axis = parse_grid_axis(o.grid);
    grid.axes.assign(static_cast<std::size_t>(n), axis);
    out.emplace(o.out);
  } catch (const Error& e) {
    std::cerr << "lmmss probe: " << e.what() << '\n';
    return kConfig;
  }

  const Execution exec = o.serial ? Execution::serial : Execution::parallel;
  const NlsProblem& problem = bp->problem;
  try {
    if (o.what == "completeness") {
      const CompletenessScan scan = completeness_scan(problem, *scaling, grid, exec);
      std::ostream& csv = out->stream();
      for (std::size_t d = 0; d < grid.axes.size(); ++d) csv << 'x' << (d + 1) << ',';
      csv << "gamma,violated\n";
      for (std::size_t i = 0; i < scan.gamma.size(); ++i) {
        csv << format_vector(grid.point(i), ',') << ',' << format_double(scan.gamma[i]) << ','
            << (scan.violated[i] ? 1 : 0) << '\n';
      }
      ReportWriter w(std::cerr);
      write_completeness(w, scan);
      return kOk;
    }
    ReportWriter w(out->stream());
    if (o.what == "error-bound") {
      write_error_bound(w, probe_error_bound(problem, center, o.radius, o.samples, o.seed, exec));
    } else if (o.what == "lipschitz") {
      write_lipschitz(w, probe_lipschitz(problem, center, o.radius, o.samples, o.seed, exec));
    } else if (o.what == "linearization") {
      const auto samples = sample_ball(center, o.radius, o.samples, o.seed);
      const std::vector<Vector> starts(samples.begin(), samples.begin() + std::min<std::size_t>(8, samples.size()));
      write_linearization(w, probe_linearization(problem, stationary_points_near(problem, starts), samples));
    } else {
      const auto samples = sample_ball(center, o.radius, std::min<std::size_t>(8, o.samples), o.seed);
      write_assumptions(w, assess_assumptions(problem, *scaling, center, o.radius, o.samples, o.seed,
                                              stationary_points_near(problem, samples), exec));
    }
  } catch (const Error& e) {
    std::cerr << "lmmss probe: " << e.what() << '\n';
    return kNumerical;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Levenberg-Marquardt with singular scaling for non-zero residue least squares"};
  app.set_config("--config", "", "INI file with flag values; command-line flags take precedence");
  app.require_subcommand(1);

  RunOptions run;
  auto* run_cmd = app.add_subcommand("run", "solve a built-in problem and write the iterate CSV");
  run_cmd->add_option("--problem", run.problem, "ex1, ex2 or ex3")->capture_default_str();
  run_cmd->add_option("--mode", run.mode, "pure, globalized or classic-lm")->capture_default_str();
  run_cmd->add_option("--x0", run.x0, "start point, comma separated (default: first built-in start)");
  run_cmd->add_option("--scaling", run.scaling, "identity, builtin, first-difference or rows 'a,b;c,d'")
      ->capture_default_str();
  run_cmd->add_option("--csv", run.csv, "iterate CSV path, - for stdout")->capture_default_str();
  run_cmd->add_option("--report", run.report, "summary report path (default: stderr)");
  add_solver_flags(run_cmd, run.solver, run.no_safeguard);

  ReproduceOptions rep;
  auto* rep_cmd = app.add_subcommand("reproduce", "rerun a published experiment and compare");
  rep_cmd->add_option("target", rep.target, "table1, table2, table3, fig1, fig2 or all")->required();
  rep_cmd->add_option("--out-dir", rep.out_dir, "directory for CSV and report files")->capture_default_str();

  ProbeOptions probe;
  auto* probe_cmd = app.add_subcommand("probe", "estimate the local convergence hypotheses");
  probe_cmd->add_option("--what", probe.what, "error-bound, lipschitz, linearization, completeness or all")
      ->required();
  probe_cmd->add_option("--problem", probe.problem)->capture_default_str();
  probe_cmd->add_option("--center", probe.center, "sampling ball center (default: first built-in start)");
  probe_cmd->add_option("--radius", probe.radius)->capture_default_str();
  probe_cmd->add_option("--samples", probe.samples)->capture_default_str();
  probe_cmd->add_option("--seed", probe.seed)->capture_default_str();
  probe_cmd->add_option("--scaling", probe.scaling)->capture_default_str();
  probe_cmd->add_option("--grid", probe.grid, "lo:hi:step, applied to every coordinate")->capture_default_str();
  probe_cmd->add_option("--out", probe.out, "report or CSV path, - for stdout")->capture_default_str();
  probe_cmd->add_flag("--serial", probe.serial, "evaluate without OpenMP");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  if (*run_cmd) return cmd_run(run);
  if (*rep_cmd) return cmd_reproduce(rep);
  return cmd_probe(probe);
}
