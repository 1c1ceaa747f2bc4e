#include "doctest.h"

#include <sys/wait.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace fs = std::filesystem;

namespace {

struct Sandbox {
  fs::path dir;
  Sandbox() {
    dir = fs::temp_directory_path() / ("lmmss_cli_" + std::to_string(::getpid()) + "_" + std::to_string(counter()++));
    fs::create_directories(dir);
  }
  ~Sandbox() { fs::remove_all(dir); }
  static int& counter() {
    static int c = 0;
    return c;
  }
  std::string path(const std::string& name) const { return (dir / name).string(); }
};

int run(const std::string& args, const Sandbox& box) {
  const std::string cmd = "cd '" + box.dir.string() + "' && '" LMMSS_CLI "' " + args + " > out.txt 2> err.txt";
  const int raw = std::system(cmd.c_str());
  return WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
}

std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

}  // namespace

TEST_CASE("run writes the CSV and exits 0 on convergence") {
  Sandbox box;
  CHECK(run("run --problem ex1 --mode pure --x0 0,2.2660680 --grad-tol 1e-8 --csv t.csv --report r.txt", box) == 0);
  const std::string csv = slurp(box.path("t.csv"));
  CHECK(csv.rfind("k,x,phi,grad_norm,lambda,alpha,dist,step_norm,dir_kind,full_step\n", 0) == 0);
  CHECK(csv.find("\n0,0;2.2660680000000002,") != std::string::npos);
  const std::string report = slurp(box.path("r.txt"));
  CHECK(report.find("status: converged") != std::string::npos);
  CHECK(report.find("iterations: 3") != std::string::npos);
  CHECK(report.find("[audit]") != std::string::npos);
  CHECK(report.find("[phi_monotone]") != std::string::npos);

  CHECK(run("run --problem ex1 --mode pure --x0 0,2.2660680 --grad-tol 1e-8 --csv t2.csv --report r2.txt", box) == 0);
  CHECK(slurp(box.path("t2.csv")) == csv);
}

TEST_CASE("run exit codes") {
  Sandbox box;
  CHECK(run("run --problem ex1 --x0 1,2,3", box) == 4);
  CHECK(slurp(box.path("err.txt")).find("x0") != std::string::npos);
  CHECK(run("run --problem nope", box) == 4);
  CHECK(run("run --mode sideways", box) == 4);
  CHECK(run("run --zeta 2", box) == 4);
  CHECK(run("run --bogus-flag", box) == 4);
  CHECK(run("run --problem ex1 --x0 2,4 --max-iters 1", box) == 2);
  CHECK(run("run --problem ex1 --x0 -1,3 --no-safeguard", box) == 3);
  CHECK(run("run --problem ex1 --x0 -1,3 --m-cap 1", box) == 0);
  CHECK(run("run --problem ex1 --x0 1,-1 --mode pure", box) == 1);
  CHECK(run("run --problem ex2 --mode pure --scaling identity --x0 0.8,2.1 --grad-tol 1e-10", box) == 0);
  CHECK(run("--help", box) == 0);
  CHECK(run("run --help", box) == 0);
}

TEST_CASE("config file values are overridden by flags") {
  Sandbox box;
  {
    std::ofstream cfg(box.path("run.ini"));
    cfg << "[run]\nproblem=ex2\nmode=pure\nscaling=identity\nx0=\"0.8,2.1\"\ngrad-tol=1e-10\nmax-iters=2\n";
  }
  CHECK(run("--config run.ini run", box) == 2);
  CHECK(run("--config run.ini run --max-iters 50", box) == 0);
  const std::string csv = slurp(box.path("out.txt"));
  CHECK(csv.find("\n5,") != std::string::npos);
}

TEST_CASE("reproduce writes artifacts and a verdict") {
  Sandbox box;
  CHECK(run("reproduce table3 --out-dir art", box) == 0);
  CHECK(slurp(box.path("out.txt")).find("VERDICT: pass") != std::string::npos);
  CHECK(fs::exists(box.dir / "art" / "table3_report.txt"));
  CHECK(fs::exists(box.dir / "art" / "table3_start1.csv"));

  CHECK(run("reproduce fig2 --out-dir art", box) == 0);
  CHECK(fs::exists(box.dir / "art" / "fig2_no-safeguard_trajectory.csv"));
  CHECK(fs::exists(box.dir / "art" / "fig2_safeguard_trajectory.csv"));
  const std::string levels = slurp(box.path("art/fig2_levels.csv"));
  CHECK(levels.rfind("x1,x2,phi\n", 0) == 0);
  CHECK(std::count(levels.begin(), levels.end(), '\n') == 200 * 200 + 1);
  const std::string traj = slurp(box.path("art/fig2_safeguard_trajectory.csv"));
  CHECK(traj.rfind("k,x1,x2\n0,-1,3\n", 0) == 0);

  CHECK(run("reproduce table9", box) == 4);
}

TEST_CASE("probe subcommand") {
  Sandbox box;
  CHECK(run("probe --problem ex1 --center 0,2.236 --radius 0.5 --what error-bound --seed 7 --out eb.txt", box) == 0);
  const std::string eb = slurp(box.path("eb.txt"));
  CHECK(eb.find("[error-bound]") != std::string::npos);
  CHECK(eb.find("seed: 7") != std::string::npos);
  CHECK(run("probe --problem ex1 --center 0,2.236 --radius 0.5 --what error-bound --seed 7 --out eb2.txt", box) == 0);
  CHECK(slurp(box.path("eb2.txt")) == eb);

  CHECK(run("probe --problem ex1 --what completeness --grid -3:3:0.05 --out grid.csv", box) == 0);
  const std::string grid = slurp(box.path("grid.csv"));
  CHECK(grid.rfind("x1,x2,gamma,violated\n", 0) == 0);
  CHECK(std::count(grid.begin(), grid.end(), '\n') == 121 * 121 + 1);
  CHECK(slurp(box.path("err.txt")).find("violations: 121") != std::string::npos);

  CHECK(run("probe --problem ex3 --what lipschitz --center 0,0 --radius 1", box) == 0);
  CHECK(run("probe --problem ex3 --what linearization --center 0.1,0.1 --radius 0.3", box) == 0);
  CHECK(run("probe --problem ex1 --what all --center 0,2.236", box) == 0);
  CHECK(run("probe --problem ex1 --what curvature", box) == 4);
}
