#include <cstdlib>
#include <unistd.h>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "doctest.h"

#include "json.hpp"

namespace fs = std::filesystem;

namespace {

struct RunResult {
  int exit_code = -1;
  std::string out;
};

fs::path scratch_dir() {
  static const fs::path dir = [] {
    fs::path p = fs::temp_directory_path() /
                 ("branchkit_cli_test_" + std::to_string(::getpid()));
    fs::create_directories(p);
    return p;
  }();
  return dir;
}

RunResult run_cli(const std::string& args) {
  const fs::path out_file = scratch_dir() / "stdout.txt";
  const std::string cmd = std::string(BRANCHKIT_CLI_PATH) + " " + args + " > " +
                          out_file.string() + " 2>/dev/null";
  const int status = std::system(cmd.c_str());
  RunResult r;
  r.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  std::ifstream in(out_file);
  std::stringstream ss;
  ss << in.rdbuf();
  r.out = ss.str();
  return r;
}

std::string count_lines(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line))
    if (!line.empty()) ++n;
  return std::to_string(n);
}

}  // namespace

TEST_CASE("generate writes the complete graph for p = 1") {
  const fs::path out = scratch_dir() / "k4.tsv";
  const RunResult r = run_cli("generate --family er --n 4 --p 1 --seed 1 --out " + out.string());
  CHECK(r.exit_code == 0);
  CHECK(count_lines(out) == "6");
  CHECK(fs::exists(out.string() + ".meta.json"));
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["graph"]["edges"] == 6);
  CHECK(j["config"]["seed"] == 1);
}

TEST_CASE("usage errors exit with code 2") {
  CHECK(run_cli("generate --family er --p 0.5 --out /tmp/x.tsv").exit_code == 2);
  CHECK(run_cli("estimate --replicates a b").exit_code == 2);
  CHECK(run_cli("no-such-command").exit_code == 2);
}

TEST_CASE("data errors exit with code 3") {
  CHECK(run_cli("kappa --in /nonexistent/graph.tsv").exit_code == 3);
}

TEST_CASE("pareto generation lands near the requested mean degree") {
  const fs::path out = scratch_dir() / "pareto.tsv";
  const RunResult r = run_cli(
      "generate --family pareto --zeta 3 --mean-degree 20 --n 2000 --seed 5 --out " +
      out.string());
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  const double mean = j["graph"]["mean_degree"].get<double>();
  CHECK(mean > 18.0);
  CHECK(mean < 22.0);
}

TEST_CASE("noiseless estimate pipeline recovers the empirical branching factor") {
  const fs::path truth = scratch_dir() / "truth.tsv";
  REQUIRE(run_cli("generate --family er --n 300 --p 0.05 --seed 9 --out " + truth.string())
              .exit_code == 0);
  const RunResult kap = run_cli("kappa --in " + truth.string());
  const double kappa = nlohmann::json::parse(kap.out)["graph"]["kappa"].get<double>();

  const std::string reps =
      truth.string() + " " + truth.string() + " " + truth.string();
  const RunResult est = run_cli("estimate --replicates " + reps + " --nb 20 --seed 1");
  CHECK(est.exit_code == 0);
  const auto j = nlohmann::json::parse(est.out);
  CHECK(j["alpha_hat"].get<double>() == doctest::Approx(0.0));
  CHECK(j["beta_hat"].get<double>() == doctest::Approx(0.0));
  CHECK(j["kappa_hat"].get<double>() == doctest::Approx(kappa).epsilon(1e-9));
  CHECK(j["converged"].get<bool>());
}

TEST_CASE("estimation that cannot converge exits with code 4") {
  // perfect matchings on the same four labels: u1 and u2 coincide, which
  // makes the fixed point singular
  const fs::path a = scratch_dir() / "a.tsv";
  const fs::path b = scratch_dir() / "b.tsv";
  const fs::path c = scratch_dir() / "c.tsv";
  std::ofstream(a) << "0\t1\n2\t3\n";
  std::ofstream(b) << "0\t2\n1\t3\n";
  std::ofstream(c) << "0\t3\n1\t2\n";
  const RunResult r =
      run_cli("estimate --replicates " + a.string() + " " + b.string() + " " + c.string());
  CHECK(r.exit_code == 4);
}

TEST_CASE("identical seeds give byte-identical output") {
  const fs::path truth = scratch_dir() / "det.tsv";
  REQUIRE(run_cli("generate --family er --n 200 --p 0.08 --seed 77 --out " + truth.string())
              .exit_code == 0);
  const std::string cmd = "simulate-coverage --in " + truth.string() +
                          " --alphas 0.01 --betas 0.1 --trials 5 --nb 30 --seed 3";
  const RunResult first = run_cli(cmd);
  const RunResult second = run_cli(cmd);
  CHECK(first.exit_code == 0);
  CHECK(first.out == second.out);
  CHECK(first.out.find("family,n,mean_degree") != std::string::npos);
}

TEST_CASE("thresholds subcommand arithmetic") {
  const RunResult r = run_cli("thresholds --kappa 3 --lambda 1");
  CHECK(r.exit_code == 0);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["percolation_threshold"]["value"].get<double>() == doctest::Approx(0.5));
  CHECK(j["immunization_threshold"]["value"].get<double>() == doctest::Approx(2.0 / 3.0));
  CHECK_FALSE(j["subcritical"].get<bool>());

  const RunResult sub = run_cli("thresholds --kappa 1 --theta 0.016 --gamma 0.125");
  const auto js = nlohmann::json::parse(sub.out);
  CHECK(js["subcritical"].get<bool>());
  CHECK(js["r0"]["value"].get<double>() == doctest::Approx(0.0));
}
