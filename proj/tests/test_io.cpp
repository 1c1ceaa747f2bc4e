#include "lmmss/error.hpp"
#include "lmmss/io.hpp"
#include "lmmss/reproduce.hpp"

#include "doctest.h"

#include <clocale>
#include <random>
#include <sstream>

using namespace lmmss;

namespace {

std::vector<std::string> lines_of(const std::string& text) {
  std::vector<std::string> out;
  std::istringstream in(text);
  for (std::string line; std::getline(in, line);) out.push_back(line);
  return out;
}

std::vector<std::string> fields_of(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

}  // namespace

TEST_CASE("number formatting") {
  CHECK(format_double(0.1) == "0.10000000000000001");
  CHECK(format_double(1.0) == "1");
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-300.0, 300.0);
  for (int i = 0; i < 1000; ++i) {
    const double x = std::pow(10.0, u(rng)) * (i % 2 ? 1.0 : -1.0);
    CHECK(std::stod(format_double(x)) == x);
  }
  CHECK(format_double(std::nan("")) == "nan");
  CHECK(format_double(-INFINITY) == "-inf");
  Vector v(2);
  v << 0.5, -3.0;
  CHECK(format_vector(v) == "0.5;-3");
  CHECK(format_vector(v, ',') == "0.5,-3");
}

TEST_CASE("formatting ignores the C locale") {
  const char* prev = std::setlocale(LC_ALL, nullptr);
  const std::string saved = prev ? prev : "C";
  if (std::setlocale(LC_ALL, "de_DE.UTF-8") != nullptr) {
    CHECK(format_double(0.25) == "0.25");
    CHECK(parse_vector("0.25,1e-3")(1) == 1e-3);
  }
  std::setlocale(LC_ALL, saved.c_str());
}

TEST_CASE("trace CSV layout") {
  const BuiltinProblem ex1 = builtin_problem("ex1");
  SolverConfig c;
  c.mode = SolveMode::pure;
  const SolveTrace t = solve(ex1.problem, ex1.scaling, ex1.starts[0], c);
  std::ostringstream out;
  write_trace_csv(out, t);
  const auto lines = lines_of(out.str());
  REQUIRE(lines.size() == t.records.size() + 1);
  CHECK(lines[0] == "k,x,phi,grad_norm,lambda,alpha,dist,step_norm,dir_kind,full_step");
  const auto first = fields_of(lines[1]);
  REQUIRE(first.size() == 10);
  CHECK(first[0] == "0");
  CHECK(first[1] == format_vector(ex1.starts[0]));
  CHECK(first[5] == "1");
  CHECK(first[8] == "scaled");
  CHECK(first[9] == "true");
  const auto last = fields_of(lines.back());
  CHECK(last[5].empty());
  CHECK(last[7].empty());
  CHECK(last[9].empty());
  CHECK(out.str().find('\r') == std::string::npos);

  std::ostringstream again;
  write_trace_csv(again, solve(ex1.problem, ex1.scaling, ex1.starts[0], c));
  CHECK(again.str() == out.str());
}

TEST_CASE("dist column is empty without an oracle") {
  NlsProblem p("plain", 2, 2, [](const Vector& x) { return (Vector(2) << x(0) - 1.0, x(1) + 2.0).finished(); });
  const SolveTrace t = solve(p, ScalingSpec::identity(2), Vector::Zero(2), SolverConfig{});
  std::ostringstream out;
  write_trace_csv(out, t);
  const auto lines = lines_of(out.str());
  for (std::size_t i = 1; i < lines.size(); ++i) CHECK(fields_of(lines[i])[6].empty());
}

TEST_CASE("report writer") {
  std::ostringstream out;
  ReportWriter w(out);
  w.section("a");
  w.kv("x", 1.5);
  w.kv("n", 3LL);
  w.section("b");
  w.kv("s", std::string_view("text"));
  CHECK(out.str() == "[a]\nx: 1.5\nn: 3\n\n[b]\ns: text\n");
}

TEST_CASE("run summary contains the rate") {
  const BuiltinProblem ex3 = builtin_problem("ex3");
  SolverConfig c;
  c.mode = SolveMode::pure;
  c.grad_tol = 1e-10;
  const SolveTrace t = solve(ex3.problem, ex3.scaling, ex3.starts[0], c);
  std::ostringstream out;
  ReportWriter w(out);
  write_run_summary(w, ex3.problem, t, c);
  const std::string s = out.str();
  CHECK(s.find("status: converged") != std::string::npos);
  CHECK(s.find("iterations: 6") != std::string::npos);
  CHECK(s.find("rate_class: quadratic") != std::string::npos);
}

TEST_CASE("literal parsers") {
  const Vector v = parse_vector("1, -2.5,+3e2");
  CHECK(v.size() == 3);
  CHECK(v(2) == 300.0);
  CHECK_THROWS_AS(parse_vector("1,,2"), Error);
  CHECK_THROWS_AS(parse_vector("1,x"), Error);
  CHECK_THROWS_AS(parse_vector("nan"), Error);

  const GridAxis a = parse_grid_axis("-3:3:0.05");
  CHECK(a.lo == -3.0);
  CHECK(a.count() == 121);
  CHECK_THROWS_AS(parse_grid_axis("0:1"), Error);
  CHECK_THROWS_AS(parse_grid_axis("1:0:0.1"), Error);

  const ScalingSpec rows = parse_scaling("-1,1", 2, std::nullopt);
  CHECK(rows.matrix() == (DenseMatrix(1, 2) << -1.0, 1.0).finished());
  CHECK(parse_scaling("identity", 3, std::nullopt).matrix() == DenseMatrix::Identity(3, 3));
  CHECK(parse_scaling("first-difference", 3, std::nullopt).matrix().rows() == 2);
  try {
    parse_scaling("1,1;2,2", 2, std::nullopt);
    FAIL("accepted a rank-deficient scaling");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidConfig);
  }
  CHECK_THROWS_AS(parse_scaling("builtin", 2, std::nullopt), Error);
  CHECK_THROWS_AS(parse_scaling("1,2,3", 2, std::nullopt), Error);
}

TEST_CASE("tolerance rules used by the comparisons") {
  CHECK(matches_significant(1.2245, 1.2242));
  CHECK(matches_significant(1.2260, 1.2242));
  CHECK_FALSE(matches_significant(1.2300, 1.2242));
  CHECK(matches_significant(1.5894e-1, 1.5890e-1));
  CHECK_FALSE(matches_significant(1.589e-2, 1.589e-1));
  CHECK(matches_order_of_magnitude(9.0e-15, 1.0e-14));
  CHECK(matches_order_of_magnitude(1.0e-13, 1.0e-14));
  CHECK_FALSE(matches_order_of_magnitude(1.1e-13, 1.0e-14));
  CHECK_FALSE(matches_order_of_magnitude(0.0, 1.0e-14));
}

TEST_CASE("reproduce reports end with a verdict") {
  for (const auto& target : reproduce_targets()) {
    const ReproduceOutcome o = reproduce(target);
    std::ostringstream out;
    write_reproduce_report(out, o);
    const auto lines = lines_of(out.str());
    REQUIRE_FALSE(lines.empty());
    CHECK(lines.back() == std::string("VERDICT: ") + (o.pass() ? "pass" : "fail"));
  }
  CHECK_THROWS_AS(reproduce("table9"), Error);
}
