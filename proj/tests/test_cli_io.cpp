#include <array>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <memory>

#include "doctest.h"
#include "json.hpp"
#include "kuramoto/compare.hpp"
#include "kuramoto/config.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/io.hpp"

using namespace kuramoto;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("kuramoto_cli_" + name);
  fs::remove_all(p);
  return p;
}

// Runs a shell command, returning its exit status and standard output.
std::pair<int, std::string> shell(const std::string& cmd) {
  std::string out;
  FILE* pipe = popen((cmd + " 2>/dev/null").c_str(), "r");
  REQUIRE(pipe);
  std::array<char, 4096> buf{};
  while (std::fgets(buf.data(), buf.size(), pipe)) out += buf.data();
  const int status = pclose(pipe);
  return {WEXITSTATUS(status), out};
}

}  // namespace

TEST_CASE("minimal configuration takes the defaults") {
  const RunConfig c = parse_config_text("m: 0.5\nK: 0.1\nu0: \"-sin(theta)\"\n");
  CHECK(c.scenario.params.m == 0.5);
  CHECK(c.scenario.grids.n_theta == 1000);
  CHECK(c.scenario.g == "dirac(0)");
  CHECK(c.scenario.omega_grid().size() == 1);
  CHECK(c.scenario.scheme.cfl == 0.4);
  CHECK(c.scenario.rho0 == "gaussian(0, 1)");
  CHECK(!c.sweep);
}

TEST_CASE("invalid configurations") {
  CHECK_THROWS_WITH_AS(parse_config_text("m: -1\nu0: \"0\"\n"), "m must be positive", ConfigError);
  CHECK_THROWS_AS(parse_config_text("m: 1\nu0: \"0\"\nscheme:\n  cfl: 1.5\n"), ConfigError);
  try {
    parse_config_text("m: 1\nu0: \"0\"\nmass: 3\ngrid:\n  n_thetas: 5\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    const std::string msg = e.what();
    CHECK(msg.find("mass") != std::string::npos);
    CHECK(msg.find("grid.n_thetas") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_config_text("m: [1, 2]\nu0: \"0\"\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("m: 1\n"), ConfigError);
  CHECK_THROWS_AS(parse_config_text("m: 1\nu0: \"0\"\n", {"bogus.key=1"}), ConfigError);
  CHECK_THROWS_AS(parse_config_text(": : :"), ConfigError);
}

TEST_CASE("the hysteresis configuration resolves the full sweep") {
  const RunConfig c = parse_config(fs::path(CONFIG_DIR) / "fig6_hysteresis.yaml");
  CHECK(c.scenario.grids.n_theta == 100);
  CHECK(c.scenario.grids.n_omega == 600);
  REQUIRE(c.sweep);
  const auto path = c.sweep->K_path();
  CHECK(path.front() == 0.0);
  CHECK(path.back() == 4.0);
  CHECK(path.size() == 41);
  CHECK(path[1] == doctest::Approx(0.1));
  CHECK(c.sweep->refine);
  CHECK(c.sweep->refine_step == 0.05);
}

TEST_CASE("overrides and round trip") {
  const RunConfig c =
      parse_config_text("m: 0.5\nK: 0.1\nu0: \"-sin(theta)\"\n", {"scheme.cfl=0.3", "time.snapshots=[0.5, 1]", "K=0.123456789012345678"});
  CHECK(c.scenario.scheme.cfl == 0.3);
  CHECK(c.scenario.snapshot_times == std::vector<double>{0.5, 1.0});
  CHECK(c.scenario.params.K == 0.123456789012345678);
  CHECK(parse_config_text(to_yaml(c)) == c);

  for (const auto& entry : fs::directory_iterator(CONFIG_DIR)) {
    const RunConfig r = parse_config(entry.path());
    CHECK_MESSAGE(parse_config_text(to_yaml(r)) == r, entry.path().string());
  }
}

TEST_CASE("CSV I/O keeps full precision") {
  const fs::path p = scratch("table.csv");
  const double x = 0.1 + 0.2;
  {
    io::CsvWriter w(p, {"a", "b"});
    w.row({x, -1e-300});
    w.row({std::nextafter(1.0, 2.0), 3.0});
  }
  const io::CsvTable t = io::read_csv(p);
  CHECK(t.rows() == 2);
  CHECK(t.numeric("a")[0] == x);
  CHECK(t.numeric("b")[0] == -1e-300);
  CHECK(t.numeric("a")[1] == std::nextafter(1.0, 2.0));
  CHECK_THROWS_AS(t.column_index("c"), Error);
  fs::remove(p);
}

TEST_CASE("command line tool") {
  const std::string exe = HKURA_EXE;
  const std::string cfg = std::string(CONFIG_DIR) + "/fig1ab_subcritical.yaml";

  SUBCASE("classify prints a JSON verdict") {
    const auto [rc, out] = shell(exe + " classify --config " + cfg);
    CHECK(rc == 0);
    const auto j = nlohmann::json::parse(out);
    CHECK(j["verdict"] == "Subcritical");
    CHECK(j["d_minus"].get<double>() == doctest::Approx(-1.8944).epsilon(1e-4));
  }

  SUBCASE("run, compare and grid mismatch") {
    const fs::path a = scratch("run_a");
    const fs::path b = scratch("run_b");
    const std::string small = " --set grid.n_theta=200 --set time.t_end=1 --set time.snapshots=[0.5,1] --set solver=eulerian";
    CHECK(shell(exe + " run --deterministic --config " + cfg + " --out " + a.string() + small).first == 0);
    REQUIRE(fs::exists(a / "series.csv"));
    REQUIRE(fs::exists(a / "snapshots" / "t=1.csv"));
    const auto manifest = nlohmann::json::parse(io::read_text(a / "manifest.json"));
    CHECK(manifest["solver"] == "eulerian");
    CHECK(manifest["grid"]["n_theta"] == 200);
    CHECK(manifest["classification"]["verdict"] == "Subcritical");

    // The manifest's configuration reproduces the run bit for bit.
    const fs::path echo = scratch("echo.yaml");
    io::write_text(echo, manifest["config"].get<std::string>());
    CHECK(shell(exe + " run --config " + echo.string() + " --out " + b.string()).first == 0);
    const auto [rc, out] = shell(exe + " compare " + a.string() + " " + b.string());
    CHECK(rc == 0);
    const auto rep = nlohmann::json::parse(out);
    CHECK(rep["max_abs_dr"].get<double>() == 0.0);
    CHECK(rep["max_abs_dEk"].get<double>() == 0.0);
    CHECK(rep["snapshots"].size() == 2);
    for (const auto& s : rep["snapshots"]) CHECK(s["l1_rho"].get<double>() == 0.0);

    const CompareReport self = compare_runs(a, a);
    CHECK(self.matched_records > 10);
    CHECK(self.max_dr == 0.0);

    const fs::path c = scratch("run_c");
    CHECK(shell(exe + " run --config " + cfg + " --out " + c.string() + " --set grid.n_theta=100 --set time.t_end=1 --set time.snapshots=[1] --set solver=eulerian").first == 0);
    CHECK_THROWS_AS(compare_runs(a, c), GridMismatch);
    CHECK(shell(exe + " compare " + a.string() + " " + c.string()).first != 0);
    for (const auto& d : {a, b, c, echo}) fs::remove_all(d);
  }

  SUBCASE("oracle writes trajectories") {
    const fs::path o = scratch("oracle");
    CHECK(shell(exe + " oracle --config " + cfg + " --out " + o.string() + " --set time.t_end=0.5 --set time.snapshots=[] --set oracle.samples=64").first == 0);
    CHECK(fs::exists(o / "trajectories.csv"));
    CHECK(io::read_csv(o / "trajectories.csv").rows() == 64);
    CHECK(nlohmann::json::parse(io::read_text(o / "manifest.json"))["solver"] == "lagrangian");
    fs::remove_all(o);
  }

  SUBCASE("errors give a nonzero exit status") {
    const fs::path bad = scratch("bad.yaml");
    io::write_text(bad, "m: -1\nu0: \"0\"\n");
    CHECK(shell(exe + " classify --config " + bad.string()).first != 0);
    CHECK(shell(exe + " frobnicate").first != 0);
    fs::remove(bad);
  }
}
