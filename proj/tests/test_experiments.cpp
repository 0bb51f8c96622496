#include <cmath>
#include <random>

#include "doctest.h"
#include "kuramoto/error.hpp"
#include "kuramoto/experiments.hpp"
#include "oracles.hpp"

using namespace kuramoto;

namespace {

ScenarioConfig base(double m, double K, const std::string& u0) {
  ScenarioConfig c;
  c.params = {m, K};
  c.u0 = u0;
  return c;
}

}  // namespace

TEST_CASE("marginals") {
  const ThetaGrid g = make_theta_grid(40);
  const OmegaGrid one = discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5);
  const FieldState s = init_state(InitSpec::parse("gaussian(0, 1)", "-sin(theta)"), g, one);
  Marginals m = marginalize(s, one);
  CHECK(m.rho == s.rho);
  CHECK(m.u == s.u);

  const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 9, 4);
  const FieldState flat = init_state(InitSpec::parse("gaussian(0, 1)", "-sin(theta)"), g, w);
  m = marginalize(flat, w);
  for (std::size_t j = 0; j < 40; ++j) {
    CHECK(m.rho[j] == doctest::Approx(flat.rho[j]).epsilon(1e-13));
    CHECK(m.u[j] == doctest::Approx(flat.u[j]).epsilon(1e-13));
  }

  auto gen = oracle::rng(4);
  std::uniform_real_distribution<double> U(0, 1);
  FieldState r(40, 9);
  for (auto& x : r.rho) x = U(gen);
  normalize_masses(r, g);
  m = marginalize(r, w);
  double mass = 0.0;
  for (double x : m.rho) mass += x * g.spacing();
  CHECK(std::abs(mass - 1.0) < 1e-12);
}

TEST_CASE("subcritical identical scenario") {
  ScenarioConfig c = base(0.5, 0.1, "-sin(theta)");
  c.solver = SolverKind::both;
  c.snapshot_times = {1.0, 5.0};
  c.record_dt = 0.5;
  const ScenarioResult res = run_scenario(c);
  CHECK(res.verdict.verdict == Verdict::subcritical);
  for (const auto* run : {&*res.eulerian, &*res.lagrangian}) {
    CHECK(!run->blowup_time);
    CHECK(!run->failure);
    REQUIRE(run->series.size() == 11);
    CHECK(run->series.back().t == doctest::Approx(5.0));
    CHECK(run->series.back().d_v < run->series.front().d_v);
    REQUIRE(run->snapshots.size() == 2);
    CHECK(run->snapshots[0].t == doctest::Approx(1.0));
  }
  CHECK(res.final_state.t == doctest::Approx(5.0));
  CHECK(res.final_ensemble.t == doctest::Approx(5.0));
  CHECK(res.eulerian->series.back().mass_err < 1e-12);
}

TEST_CASE("supercritical identical scenario blows up before the bound") {
  ScenarioConfig c = base(1.0, 1.0, "-2*sin(theta)");
  c.solver = SolverKind::both;
  c.scheme.blowup_grad = 50;
  c.t_end = 3.0;
  const ScenarioResult res = run_scenario(c);
  REQUIRE(res.verdict.blowup_time_bound);
  REQUIRE(res.eulerian->blowup_time);
  REQUIRE(res.lagrangian->blowup_time);
  CHECK(*res.eulerian->blowup_time <= *res.verdict.blowup_time_bound);
  CHECK(*res.lagrangian->blowup_time <= *res.verdict.blowup_time_bound);
  CHECK(res.eulerian->blowup_reason == "gradient");
}

TEST_CASE("nonidentical subcritical scenario stays regular") {
  // Reduced frequency grid; the full 1000 x 600 run lives in the configs.
  ScenarioConfig c = base(2.0, 0.1, "-0.1*sin(theta)");
  c.g = "normal(0, 1)";
  c.grids.n_omega = 24;
  c.record_dt = 0.5;
  const ScenarioResult res = run_scenario(c);
  CHECK(res.verdict.verdict == Verdict::subcritical);
  CHECK(!res.eulerian->blowup_time);
  CHECK(!res.eulerian->failure);
  CHECK(res.eulerian->series.back().t == doctest::Approx(5.0));
  CHECK(res.eulerian->series.back().mass_err < 1e-12);
}

TEST_CASE("steady state search") {
  ScenarioConfig c = base(1.0, 0.0, "0");
  c.rho0 = "uniform";
  c.grids.n_theta = 64;
  SweepConfig sw;
  sw.steady_window = 1.0;
  sw.t_max = 10.0;
  const FieldState start = init_state(c.init(), c.theta_grid(), c.omega_grid());

  SUBCASE("free incoherent state converges after exactly one window") {
    const SteadyResult s = steady_r(c, 0.0, sw, start);
    CHECK(s.converged);
    CHECK(s.r_inf < 1e-12);
    CHECK(s.t_used == doctest::Approx(sw.steady_window));
  }

  SUBCASE("strong coupling synchronises") {
    ScenarioConfig g = base(0.1, 2.0, "0");
    g.grids.n_theta = 200;
    SweepConfig w = sw;
    w.t_max = 40.0;
    const FieldState s0 = init_state(g.init(), g.theta_grid(), g.omega_grid());
    const SteadyResult s = steady_r(g, 2.0, w, s0);
    CHECK(!s.blowup);
    CHECK(s.r_inf > 0.99);
  }
}

TEST_CASE("single-point sweep has no loop") {
  ScenarioConfig c = base(1.0, 0.0, "-0.5*sin(theta)");
  c.grids.n_theta = 32;
  SweepConfig sw;
  sw.K_min = sw.K_max = 1.0;
  sw.t_max = 5.0;
  const SweepResult r = hysteresis_sweep(sw, c);
  REQUIRE(r.forward.size() == 1);
  REQUIRE(r.backward.size() == 1);
  CHECK(r.loop_area == 0.0);
  CHECK(r.jumps.empty());
  CHECK(sw.K_path().size() == 1);
}

TEST_CASE("sweep analysis") {
  SweepResult r;
  r.forward = {{0, 0.0}, {1, 0.01}, {2, 0.6}, {3, 0.7}};
  r.backward = {{3, 0.7}, {2, 0.65}, {1, 0.6}, {0, 0.02}};
  analyse_sweep(r, 0.1);
  REQUIRE(r.K_up);
  REQUIRE(r.K_down);
  CHECK(*r.K_up == 1.5);
  CHECK(*r.K_down == 0.5);
  CHECK(r.jumps.size() == 2);
  // |gap| = 0.02, 0.59, 0.05, 0 at K = 0, 1, 2, 3.
  CHECK(r.loop_area == doctest::Approx(0.5 * (0.02 + 0.59) + 0.5 * (0.59 + 0.05) + 0.5 * 0.05));
}

TEST_CASE("paths and configuration checks") {
  SweepConfig sw;
  const auto path = sw.K_path();
  CHECK(path.size() == 41);
  CHECK(path.back() == 4.0);
  sw.refine_step = 0.2;
  CHECK_THROWS_AS(sw.validate(), ConfigError);
  ScenarioConfig c = base(1.0, 0.0, "");
  CHECK_THROWS_AS(c.validate(), ConfigError);
  CHECK(parse_solver("both") == SolverKind::both);
  CHECK_THROWS_AS(parse_solver("spectral"), ConfigError);
  CHECK(snapshot_name(0.5) == "t=0.5.csv");
}
