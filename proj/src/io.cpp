#include "lmmss/io.hpp"

#include "lmmss/error.hpp"

#include <charconv>
#include <cmath>
#include <ostream>
#include <vector>

namespace lmmss {

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v, std::chars_format::general, 17);
  return std::string(buf, res.ptr);
}

std::string format_vector(const Vector& v, char sep) {
  std::string out;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (i > 0) out += sep;
    out += format_double(v(i));
  }
  return out;
}

void write_trace_csv(std::ostream& out, const SolveTrace& trace) {
  out << kTraceCsvHeader << '\n';
  for (const auto& rec : trace.records) {
    out << rec.k << ',' << format_vector(rec.x) << ',' << format_double(rec.phi) << ','
        << format_double(rec.grad_norm) << ',' << format_double(rec.lambda) << ',';
    if (rec.has_step) out << format_double(rec.alpha);
    out << ',';
    if (rec.dist && trace.dist_applicable) out << format_double(*rec.dist);
    out << ',';
    if (rec.has_step) out << format_double(rec.step_norm());
    out << ',';
    if (rec.direction.size() > 0) out << to_string(rec.dir_kind);
    out << ',';
    if (rec.has_step) out << (rec.full_step_accepted ? "true" : "false");
    out << '\n';
  }
}

void write_trajectory_csv(std::ostream& out, const SolveTrace& trace) {
  out << 'k';
  const Eigen::Index n = trace.final_x.size();
  for (Eigen::Index i = 0; i < n; ++i) out << ",x" << (i + 1);
  out << '\n';
  for (const auto& rec : trace.records) out << rec.k << ',' << format_vector(rec.x, ',') << '\n';
}

void write_grid_csv(std::ostream& out, const Grid& grid, const std::vector<double>& values,
                    std::string_view value_name) {
  for (std::size_t d = 0; d < grid.axes.size(); ++d) out << 'x' << (d + 1) << ',';
  out << value_name << '\n';
  for (std::size_t i = 0; i < values.size(); ++i) {
    out << format_vector(grid.point(i), ',') << ',' << format_double(values[i]) << '\n';
  }
}

void ReportWriter::section(std::string_view name) {
  if (!first_) out_ << '\n';
  first_ = false;
  out_ << '[' << name << "]\n";
}

void ReportWriter::kv(std::string_view key, std::string_view value) {
  out_ << key << ": " << value << '\n';
}

void ReportWriter::kv(std::string_view key, double value) { kv(key, format_double(value)); }

void ReportWriter::kv(std::string_view key, long long value) { kv(key, std::to_string(value)); }

void ReportWriter::kv(std::string_view key, const Vector& value) { kv(key, format_vector(value, ',')); }

void write_run_summary(ReportWriter& w, const NlsProblem& problem, const SolveTrace& trace,
                       const SolverConfig& config) {
  w.section("run");
  w.kv("problem", problem.name());
  w.kv("mode", to_string(config.mode));
  w.kv("safeguard", config.safeguard ? "on" : "off");
  w.kv("status", to_string(trace.status));
  if (!trace.message.empty()) w.kv("message", trace.message);
  w.kv("iterations", static_cast<long long>(trace.iterations()));
  w.kv("final_x", trace.final_x);
  if (!trace.records.empty()) {
    w.kv("final_phi", trace.records.back().phi);
    w.kv("final_grad_norm", trace.records.back().grad_norm);
  }
  if (trace.records.empty()) return;
  if (!problem.has_distance()) {
    w.kv("dist_oracle", "none");
    return;
  }
  if (!trace.dist_applicable) {
    w.kv("dist_oracle", "inapplicable");
    return;
  }
  std::vector<double> dist;
  for (const auto& rec : trace.records) dist.push_back(rec.dist.value_or(0.0));
  w.kv("final_dist", dist.back());
  if (const auto s = trace.records.back().surrogate_dist) w.kv("final_surrogate_dist", *s);
  try {
    const RateEstimate rate = estimate_rate(dist);
    w.kv("rate_order", rate.order_q);
    w.kv("rate_class", to_string(rate.classification));
  } catch (const Error& e) {
    w.kv("rate_class", std::string("n/a (") + std::string(to_string(e.code())) + ")");
  }
}

void write_error_bound(ReportWriter& w, const ErrorBoundReport& r) {
  w.section("error-bound");
  w.kv("center", r.center);
  w.kv("radius", r.radius);
  w.kv("seed", static_cast<long long>(r.seed));
  w.kv("samples", static_cast<long long>(r.samples));
  w.kv("excluded", static_cast<long long>(r.excluded));
  w.kv("omega_ratio_min", r.stats.min);
  w.kv("omega_ratio_max", r.stats.max);
  w.kv("omega_ratio_mean", r.stats.mean);
}

void write_lipschitz(ReportWriter& w, const LipschitzReport& r) {
  w.section("lipschitz");
  w.kv("center", r.center);
  w.kv("radius", r.radius);
  w.kv("seed", static_cast<long long>(r.seed));
  w.kv("samples", static_cast<long long>(r.samples));
  w.kv("estimate", r.estimate);
}

void write_linearization(ReportWriter& w, const LinearizationFit& fit) {
  w.section("linearization");
  w.kv("stationary_used", static_cast<long long>(fit.stationary_used));
  w.kv("pairs_total", static_cast<long long>(fit.pairs_total));
  w.kv("pairs_fitted", static_cast<long long>(fit.pairs_fitted));
  w.kv("degenerate_zero", fit.degenerate_zero ? "true" : "false");
  w.kv("no_fit", fit.no_fit ? "true" : "false");
  w.kv("r", fit.r);
  w.kv("c", fit.c);
  w.kv("spread_decades", fit.spread_decades);
}

void write_completeness(ReportWriter& w, const CompletenessScan& scan) {
  w.section("completeness");
  w.kv("points", static_cast<long long>(scan.gamma.size()));
  w.kv("violations", static_cast<long long>(scan.violation_count()));
  w.kv("gamma_min", scan.gamma_min());
}

void write_audit(ReportWriter& w, const AuditReport& audit) {
  w.section("audit");
  w.kv("audited", static_cast<long long>(audit.audited));
  w.kv("skipped", static_cast<long long>(audit.skipped));
  w.kv("violations", static_cast<long long>(audit.violations.size()));
  for (const auto& v : audit.violations) {
    w.kv("violation", std::to_string(v.k) + " " + v.check + " lhs=" + format_double(v.lhs) +
                          " rhs=" + format_double(v.rhs));
  }
}

void write_monotonicity(ReportWriter& w, const MonotoneReport& mono) {
  w.section("phi_monotone");
  w.kv("steps", static_cast<long long>(mono.steps));
  w.kv("strict", std::string_view(mono.strictly_decreasing() ? "yes" : "no"));
  auto join = [](const std::vector<int>& ks) {
    std::string s;
    for (int k : ks) s += (s.empty() ? "" : ",") + std::to_string(k);
    return s.empty() ? std::string("none") : s;
  };
  w.kv("full_step_increases", std::string_view(join(mono.full_step_increases)));
  w.kv("armijo_increases", std::string_view(join(mono.armijo_increases)));
}

void write_assumptions(ReportWriter& w, const AssumptionReport& r) {
  w.section("assumptions");
  w.kv("center", r.center);
  w.kv("radius", r.radius);
  w.kv("seed", static_cast<long long>(r.seed));
  w.kv("sample_count", static_cast<long long>(r.sample_count));
  w.kv("gamma_min", r.gamma_min);
  if (r.omega_ratio_stats) {
    w.kv("omega_ratio_min", r.omega_ratio_stats->min);
    w.kv("omega_ratio_max", r.omega_ratio_stats->max);
    w.kv("omega_ratio_mean", r.omega_ratio_stats->mean);
  } else {
    w.kv("omega_ratio", "no oracle");
  }
  w.kv("lipschitz_estimate", r.lipschitz_estimate);
  if (r.linearization_fit) {
    w.kv("linearization_r", r.linearization_fit->r);
    w.kv("linearization_c", r.linearization_fit->c);
    w.kv("linearization_no_fit", r.linearization_fit->no_fit ? "true" : "false");
  }
}

namespace {

double parse_double(std::string_view text) {
  while (!text.empty() && text.front() == ' ') text.remove_prefix(1);
  while (!text.empty() && text.back() == ' ') text.remove_suffix(1);
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(text.data(), text.data() + text.size(), v);
  if (text.empty() || res.ec != std::errc() || res.ptr != text.data() + text.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::InvalidConfig, "not a finite number: '" + std::string(text) + "'");
  }
  return v;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const std::size_t pos = text.find(sep, start);
    parts.push_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

}  // namespace

Vector parse_vector(std::string_view text) {
  const auto parts = split(text, ',');
  Vector v(static_cast<Eigen::Index>(parts.size()));
  for (std::size_t i = 0; i < parts.size(); ++i) v(static_cast<Eigen::Index>(i)) = parse_double(parts[i]);
  return v;
}

GridAxis parse_grid_axis(std::string_view text) {
  const auto parts = split(text, ':');
  if (parts.size() != 3) throw Error(ErrorCode::InvalidConfig, "grid must be lo:hi:step");
  GridAxis axis{parse_double(parts[0]), parse_double(parts[1]), parse_double(parts[2])};
  (void)axis.count();
  return axis;
}

ScalingSpec parse_scaling(std::string_view text, Eigen::Index n,
                          const std::optional<ScalingSpec>& builtin) {
  if (text == "identity") return ScalingSpec::identity(n);
  if (text == "first-difference") return ScalingSpec::first_difference(n);
  if (text == "builtin") {
    if (!builtin) throw Error(ErrorCode::InvalidConfig, "no built-in scaling for this problem");
    return *builtin;
  }
  const auto rows = split(text, ';');
  DenseMatrix l(static_cast<Eigen::Index>(rows.size()), n);
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const Vector row = parse_vector(rows[i]);
    if (row.size() != n) {
      throw Error(ErrorCode::InvalidConfig, "scaling row " + std::to_string(i) + " has " +
                                                std::to_string(row.size()) + " entries, expected " +
                                                std::to_string(n));
    }
    l.row(static_cast<Eigen::Index>(i)) = row.transpose();
  }
  try {
    return ScalingSpec::custom(std::move(l));
  } catch (const Error& e) {
    throw Error(ErrorCode::InvalidConfig, e.what());
  }
}

}  // namespace lmmss
