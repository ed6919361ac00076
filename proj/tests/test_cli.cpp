#include <doctest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "svboot/csv_io.hpp"
#include "svboot/mc.hpp"
#include "svboot/rng.hpp"
#include "svboot/spatial.hpp"

namespace {

const std::string kCli = SVBOOT_CLI_PATH;

struct CmdResult {
  int exit_code;
  std::string out;
  std::string err;
};

std::string slurp(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

CmdResult run_cli(const std::string& args) {
  const std::string out_path = "/tmp/svboot_test_out.txt";
  const std::string err_path = "/tmp/svboot_test_err.txt";
  const std::string cmd =
      kCli + " " + args + " >" + out_path + " 2>" + err_path;
  const int status = std::system(cmd.c_str());
  const int code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return {code, slurp(out_path), slurp(err_path)};
}

std::string temp_dir() {
  static int counter = 0;
  const std::string dir = "/tmp/svboot_cli_" + std::to_string(::getpid()) +
                          "_" + std::to_string(counter++);
  const int rc = std::system(("mkdir -p " + dir).c_str());
  (void)rc;
  return dir;
}

// Simulated dataset written as CSV: dense cluster, correlated values.
std::string write_simulated_csv(const std::string& dir, std::size_t n,
                                std::uint64_t seed) {
  sv::RngStream stream(seed);
  std::vector<sv::Point> pts(n);
  for (auto& p : pts) {
    p = {3750.0 + 2500.0 * stream.u01(), 3750.0 + 2500.0 * stream.u01()};
  }
  const auto z = sv::simulate_gaussian_field(pts, sv::kGeneratingParams, stream);
  const sv::SpatialDataset data(pts, z);
  const std::string path = dir + "/points.csv";
  std::ofstream f(path, std::ios::binary);
  sv::write_points_csv(f, data);
  return path;
}

}  // namespace

TEST_CASE("cli: fit recovers simulated parameters loosely") {
  const std::string dir = temp_dir();
  const std::string csv = write_simulated_csv(dir, 1000, 418);
  const auto res = run_cli("fit --input " + csv + " --output " + dir +
                           "/fit.json --max-dist 900");
  REQUIRE(res.exit_code == 0);

  const nlohmann::json fit = nlohmann::json::parse(slurp(dir + "/fit.json"));
  const double nugget = fit.at("params").at("nugget");
  const double sill = fit.at("params").at("partial_sill");
  const double shape = fit.at("params").at("shape");
  CHECK(nugget == doctest::Approx(60.0).epsilon(0.25));
  CHECK(sill == doctest::Approx(40.0).epsilon(0.25));
  CHECK(shape == doctest::Approx(200.0).epsilon(0.25));
  CHECK(fit.at("relative_bias").get<double>() > 0.5);
  CHECK(fit.at("relative_bias").get<double>() < 2.0);
  CHECK(fit.at("empirical_variogram").at("lags").size() == 10);
}

TEST_CASE("cli: malformed rows fail with the line number") {
  const std::string dir = temp_dir();
  const std::string path = dir + "/bad.csv";
  {
    std::ofstream f(path);
    f << "x,y,z\n1,2,3\na,b,c\n";
  }
  const auto res = run_cli("fit --input " + path + " --output " + dir +
                           "/fit.json --max-dist 10");
  CHECK(res.exit_code == 1);
  CHECK(res.err.find("line 3") != std::string::npos);
}

TEST_CASE("cli: missing required flags exit with code 1") {
  const auto res = run_cli("fit --input nowhere.csv");
  CHECK(res.exit_code == 1);
}

TEST_CASE("cli: screen failure exits 2 but still writes the fit") {
  const std::string dir = temp_dir();
  const std::string path = dir + "/trend.csv";
  {
    // Deterministic linear surface: the variogram grows without bound, the
    // fitted parameters blow past the screen.
    std::ofstream f(path);
    f << "x,y,z\n";
    sv::RngStream stream(9);
    for (int i = 0; i < 200; ++i) {
      const double x = 10000.0 * stream.u01();
      const double y = 10000.0 * stream.u01();
      f << x << ',' << y << ',' << x << '\n';
    }
  }
  const auto res = run_cli("fit --input " + path + " --output " + dir +
                           "/fit.json --max-dist 5000");
  CHECK(res.exit_code == 2);
  const nlohmann::json fit = nlohmann::json::parse(slurp(dir + "/fit.json"));
  CHECK_FALSE(fit.at("passes_screen").get<bool>());
}

TEST_CASE("cli: bootstrap JSON is byte-identical across worker counts") {
  const std::string dir = temp_dir();
  const std::string csv = write_simulated_csv(dir, 200, 505);
  const std::string base = " --input " + csv + " --max-dist 900 "
                           "--filter check --tau 1.5 --bootstrap-b 40 --seed 7";
  const auto r1 =
      run_cli("bootstrap" + base + " --workers 1 --output " + dir + "/b1.json");
  const auto r2 =
      run_cli("bootstrap" + base + " --workers 2 --output " + dir + "/b2.json");
  REQUIRE(r1.exit_code == 0);
  REQUIRE(r2.exit_code == 0);
  CHECK(slurp(dir + "/b1.json") == slurp(dir + "/b2.json"));
  CHECK(r1.out.find("parameter") != std::string::npos);  // the summary table
}

TEST_CASE("cli: quantile alpha=1 reproduces the unfiltered bootstrap") {
  const std::string dir = temp_dir();
  const std::string csv = write_simulated_csv(dir, 180, 606);
  const std::string base = " --input " + csv +
                           " --max-dist 900 --bootstrap-b 30 --seed 12";
  const auto rq = run_cli("bootstrap" + base +
                          " --filter quantile --alpha 1.0 --output " + dir +
                          "/q.json");
  const auto rn =
      run_cli("bootstrap" + base + " --filter none --output " + dir + "/n.json");
  REQUIRE(rq.exit_code == 0);
  REQUIRE(rn.exit_code == 0);
  const nlohmann::json q = nlohmann::json::parse(slurp(dir + "/q.json"));
  const nlohmann::json n = nlohmann::json::parse(slurp(dir + "/n.json"));
  CHECK(q.at("se") == n.at("se"));
  CHECK(q.at("theta_hat") == n.at("theta_hat"));
}

TEST_CASE("cli: exhausted attempt budget exits 3") {
  const std::string dir = temp_dir();
  // Same dataset as the determinism case, whose base fits pass the screen.
  const std::string csv = write_simulated_csv(dir, 200, 505);
  const auto res = run_cli("bootstrap --input " + csv + " --output " + dir +
                           "/b.json --max-dist 900 --filter check --tau 1e-9 "
                           "--bootstrap-b 5 --max-attempts-factor 2 --seed 3");
  CHECK(res.exit_code == 3);
}

TEST_CASE("cli: simulate then report round trip") {
  const std::string dir = temp_dir();
  const auto sim = run_cli(
      "simulate --n 120 --density high --maxdist-factor 1.5 --filter check "
      "--tau 1.1,1.5 --bootstrap-b 15 --n-sim 3 --seed 21 --output " +
      dir);
  REQUIRE(sim.exit_code == 0);

  const std::string runs = slurp(dir + "/runs.csv");
  CHECK(runs.find("n,density,maxdist_factor") == 0);
  // 2 cells x 3 runs = 6 data rows.
  CHECK(std::count(runs.begin(), runs.end(), '\n') == 7);

  const std::string perf = slurp(dir + "/performance.csv");
  for (const char* col :
       {"eta", "eta_mc_se", "eta_hat_mean", "eta_hat_sd", "bias", "mse",
        "convergence_rate"}) {
    CHECK(perf.find(col) != std::string::npos);
  }

  const auto rep = run_cli("report --input " + dir + "/runs.csv --group-by "
                           "tuning --output " + dir + "/by_tau.csv");
  REQUIRE(rep.exit_code == 0);
  const std::string table = slurp(dir + "/by_tau.csv");
  // Two tau groups, three parameters each, plus the header.
  CHECK(std::count(table.begin(), table.end(), '\n') == 7);
  CHECK(table.find("check tau=1.1") != std::string::npos);
  CHECK(table.find("check tau=1.5") != std::string::npos);
}

TEST_CASE("cli: help text documents the study tuning grids") {
  const auto boot_help = run_cli("bootstrap --help");
  CHECK(boot_help.exit_code == 0);
  CHECK(boot_help.out.find("1.1 1.5 2.0 2.5 3.0") != std::string::npos);
  CHECK(boot_help.out.find("0.75 0.80 0.85 0.90 0.95 1.00") !=
        std::string::npos);
  const auto sim_help = run_cli("simulate --help");
  CHECK(sim_help.exit_code == 0);
  CHECK(sim_help.out.find("1.1 1.5 2.0") != std::string::npos);
  CHECK(sim_help.out.find("500 1000 2000") != std::string::npos);
}

TEST_CASE("cli: simulate output is byte-identical across worker counts") {
  const std::string dir1 = temp_dir();
  const std::string dir2 = temp_dir();
  const std::string flags =
      "simulate --n 120 --density high --maxdist-factor 1.5 --filter check "
      "--tau 1.5 --bootstrap-b 15 --n-sim 3 --seed 77";
  REQUIRE(run_cli(flags + " --workers 1 --output " + dir1).exit_code == 0);
  REQUIRE(run_cli(flags + " --workers 2 --output " + dir2).exit_code == 0);
  CHECK(slurp(dir1 + "/runs.csv") == slurp(dir2 + "/runs.csv"));
  CHECK(slurp(dir1 + "/performance.csv") == slurp(dir2 + "/performance.csv"));
}

TEST_CASE("cli: report emits plot data from a fit") {
  const std::string dir = temp_dir();
  const std::string csv = write_simulated_csv(dir, 250, 808);
  REQUIRE(run_cli("fit --input " + csv + " --output " + dir +
                  "/fit.json --max-dist 900")
              .exit_code == 0);
  const auto rep = run_cli("report --plot-fit " + dir + "/fit.json --plot-out " +
                           dir + "/plot.csv");
  REQUIRE(rep.exit_code == 0);
  const std::string plot = slurp(dir + "/plot.csv");
  CHECK(plot.find("kind,distance,gamma,count") == 0);
  CHECK(plot.find("empirical,") != std::string::npos);
  CHECK(plot.find("model,") != std::string::npos);
}

TEST_CASE("cli: config file supplies flags, command line overrides") {
  const std::string dir = temp_dir();
  const std::string csv = write_simulated_csv(dir, 150, 909);
  const std::string cfg_path = dir + "/fit.cfg";
  {
    std::ofstream f(cfg_path);
    f << "input = " << csv << "\n";
    f << "output = " << dir << "/fit_a.json\n";
    f << "max-dist = 900\n";
  }
  const auto r1 = run_cli("fit --config " + cfg_path);
  CHECK(r1.exit_code == 0);
  CHECK(slurp(dir + "/fit_a.json").find("params") != std::string::npos);

  const auto r2 = run_cli("fit --config " + cfg_path + " --output " + dir +
                          "/fit_b.json");
  CHECK(r2.exit_code == 0);
  CHECK(slurp(dir + "/fit_b.json").find("params") != std::string::npos);
}
