#pragma once

// Preconfigured runs of the three built-in examples with their published
// reference values embedded, and a pass/fail comparison per target.

#include "lmmss/kernels.hpp"
#include "lmmss/problem.hpp"
#include "lmmss/solver.hpp"

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace lmmss {

/// |computed - reference| <= half a unit in the digits-th significant digit of reference.
bool matches_significant(double computed, double reference, int digits = 3);
/// Both positive and within a factor of ten of each other.
bool matches_order_of_magnitude(double computed, double reference);

enum class Quantity { grad_norm, dist, surrogate_dist };
std::string_view to_string(Quantity q);

struct ReferenceColumn {
  std::string label;
  std::string run;
  Quantity quantity = Quantity::dist;
  int first_k = 0;
  std::vector<double> values;
  /// Significant-digit rule for |reference| >= sig_floor, order of magnitude below.
  double sig_floor = 0.0;
};

struct ColumnRow {
  int k = 0;
  double reference = 0.0;
  std::optional<double> computed;
  bool significant_rule = true;
  bool pass = false;
};

struct ColumnCheck {
  ReferenceColumn column;
  std::vector<ColumnRow> rows;
  bool pass = false;
};

struct NamedCheck {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct NamedTrace {
  std::string id;
  std::string problem;
  std::string scaling;
  SolverConfig config;
  SolveTrace trace;
};

struct LevelData {
  Grid grid;
  std::vector<double> phi;
};

struct ReproduceOutcome {
  std::string target;
  std::vector<NamedTrace> runs;
  std::vector<ColumnCheck> columns;
  std::vector<NamedCheck> checks;
  std::optional<LevelData> levels;

  bool pass() const;
};

std::vector<std::string> reproduce_targets();

/// table1, table2, table3, fig1 or fig2; throws InvalidConfig otherwise.
ReproduceOutcome reproduce(std::string_view target);

/// Compare one column of reference values against a trace.
ColumnCheck compare_column(const ReferenceColumn& column, const SolveTrace& trace);

/// Side-by-side comparison ending with "VERDICT: pass" or "VERDICT: fail".
void write_reproduce_report(std::ostream& out, const ReproduceOutcome& outcome);

/// <target>_report.txt, one iterate CSV per run, and for figure targets
/// trajectory CSVs plus <target>_levels.csv.
void write_reproduce_artifacts(const std::filesystem::path& dir, const ReproduceOutcome& outcome);

}  // namespace lmmss
