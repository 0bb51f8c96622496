#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numeric>

#include "doctest.h"
#include "kuramoto/domain.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/expr.hpp"
#include "oracles.hpp"

using namespace kuramoto;
using oracle::kPi;

TEST_CASE("theta grid geometry") {
  const ThetaGrid g4 = make_theta_grid(4);
  CHECK(g4.spacing() == doctest::Approx(kPi / 2).epsilon(1e-15));
  const double expected[] = {-3 * kPi / 4, -kPi / 4, kPi / 4, 3 * kPi / 4};
  for (std::size_t j = 0; j < 4; ++j) CHECK(g4.center(j) == doctest::Approx(expected[j]).epsilon(1e-15));

  const ThetaGrid g = make_theta_grid(1000);
  CHECK(g.spacing() == doctest::Approx(2 * kPi / 1000).epsilon(1e-15));
  CHECK_THROWS_AS(make_theta_grid(3), InvalidGrid);
}

TEST_CASE("periodic indexing and phase wrapping") {
  const ThetaGrid g = make_theta_grid(8);
  CHECK(g.wrap(-1) == 7);
  CHECK(g.wrap(8) == 0);
  CHECK(g.wrap(-17) == 7);
  CHECK(g.cell_of(g.center(3)) == 3);
  CHECK(g.cell_of(g.center(3) + 2 * kPi) == 3);
  CHECK(g.cell_of(g.center(5) - 4 * kPi) == 5);
  CHECK(wrap_phase(kPi) == doctest::Approx(-kPi));
  CHECK(wrap_phase(3 * kPi + 0.25) == doctest::Approx(-kPi + 0.25));
  CHECK(wrap_phase(-0.5) == doctest::Approx(-0.5));
}

TEST_CASE("frequency discretisation") {
  const OmegaGrid d = discretize_frequency(FrequencySpec::parse("dirac(0)"), 600, 5);
  REQUIRE(d.size() == 1);
  CHECK(d.nodes[0] == 0.0);
  CHECK(d.weights[0] == 1.0);

  const OmegaGrid n600 = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 600, 5);
  CHECK(n600.size() == 600);
  CHECK(std::abs(std::accumulate(n600.weights.begin(), n600.weights.end(), 0.0) - 1.0) < 1e-12);
  CHECK(n600.nodes.front() == doctest::Approx(-5));
  CHECK(n600.nodes.back() == doctest::Approx(5));

  // Second moment of N(0,1) conditioned on [-5, 5].
  const double phi5 = std::exp(-12.5) / std::sqrt(2 * kPi);
  const double exact = 1.0 - 2 * 5 * phi5 / std::erf(5 / std::sqrt(2.0));
  const OmegaGrid n11 = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 11, 5);
  CHECK(std::abs(n11.second_moment() - exact) < 0.05 * exact);

  CHECK_THROWS_AS(FrequencySpec::parse("cauchy(0, 1)"), ConfigError);
  CHECK_THROWS_AS(discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 1, 5), InvalidGrid);
  CHECK(FrequencySpec::parse(FrequencySpec::parse("normal(0.5, 2)").to_string()).scale == 2.0);
}

TEST_CASE("expression grammar gives values and exact slopes") {
  const Expression e = Expression::parse("2*sin(2*theta) - 0.5*cos(theta)^2 + omega/4");
  for (double th : {-3.0, -1.0, 0.0, 0.7, 2.5}) {
    const double omega = 0.3;
    const double v = 2 * std::sin(2 * th) - 0.5 * std::cos(th) * std::cos(th) + omega / 4;
    const double s = 4 * std::cos(2 * th) + std::cos(th) * std::sin(th);
    const Dual d = e.eval(th, omega);
    CHECK(d.value == doctest::Approx(v).epsilon(1e-14));
    CHECK(d.slope == doctest::Approx(s).epsilon(1e-12));
  }
  CHECK(Expression::parse("-pi")(0.0) == doctest::Approx(-kPi));
  CHECK(Expression::parse("exp(theta) * sqrt(4)")(1.0) == doctest::Approx(2 * std::exp(1.0)));
  CHECK_THROWS_AS(Expression::parse("sin(theta"), ParseError);
  CHECK_THROWS_AS(Expression::parse("tan(theta)"), ParseError);
  CHECK_THROWS_AS(Expression::parse("theta theta"), ParseError);
}

TEST_CASE("initial states") {
  const ThetaGrid g = make_theta_grid(64);
  const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 5, 5);

  SUBCASE("uniform density is 1/(2 pi) everywhere") {
    const FieldState s = init_state(InitSpec::parse("uniform", "0"), g, w);
    for (double r : s.rho) CHECK(r == doctest::Approx(1 / (2 * kPi)).epsilon(1e-14));
  }

  SUBCASE("truncated Gaussian with u0 = -sin(theta)") {
    const ThetaGrid g1 = make_theta_grid(1000);
    const OmegaGrid one = discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5);
    const FieldState s = init_state(InitSpec::parse("gaussian(0, 1)", "-sin(theta)"), g1, one);
    const auto c = oracle::centres(1000);
    double total = 0.0;
    for (double th : c) total += std::exp(-th * th / 2);
    total *= 2 * kPi / 1000;
    for (std::size_t j = 0; j < 1000; j += 37) {
      CHECK(s.rho[j] == doctest::Approx(std::exp(-c[j] * c[j] / 2) / total).epsilon(1e-13));
      CHECK(s.u[j] == doctest::Approx(-std::sin(c[j])).epsilon(1e-15));
    }
    CHECK(std::abs(s.slice_mass(0, g1.spacing()) - 1.0) < 1e-14);
  }

  SUBCASE("slope of 2 sin(2 theta) reaches -4 near +-pi/2") {
    const ThetaGrid g1 = make_theta_grid(1000);
    const OmegaGrid one = discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5);
    const InitSpec spec = InitSpec::parse("uniform", "2*sin(2*theta)");
    const FieldState s = init_state(spec, g1, one);
    const auto exact = initial_velocity_slope(spec, g1, one, s);
    const auto fd = centered_slope(s, g1);
    const auto jmin = static_cast<std::size_t>(std::min_element(exact.begin(), exact.end()) - exact.begin());
    CHECK(exact[jmin] == doctest::Approx(-4).epsilon(1e-4));
    CHECK(std::abs(std::abs(g1.center(jmin)) - kPi / 2) < g1.spacing());
    CHECK(*std::min_element(fd.begin(), fd.end()) == doctest::Approx(-4).epsilon(1e-4));
  }

  SUBCASE("slice masses are one for every frequency") {
    const FieldState s = init_state(InitSpec::parse("gaussian(0.5, 0.3)", "omega - sin(theta)"), g, w);
    for (std::size_t k = 0; k < w.size(); ++k) CHECK(std::abs(s.slice_mass(k, g.spacing()) - 1.0) < 1e-14);
    CHECK(s.u[3 * 64 + 10] == doctest::Approx(w.nodes[3] - std::sin(g.center(10))));
  }

  SUBCASE("compact uniform support") {
    const FieldState s = init_state(InitSpec::parse("uniform(-0.25, 0.25)", "0"), g, w);
    for (std::size_t j = 0; j < 64; ++j) {
      if (std::abs(g.center(j)) > 0.25) CHECK(s.rho[j] == 0.0);
      else CHECK(s.rho[j] > 0.0);
    }
  }

  SUBCASE("invalid data") {
    CHECK_THROWS_AS(init_state(InitSpec::parse("-1", "0"), g, w), InvalidInitialData);
    CHECK_THROWS_AS(InitSpec::parse("table", "0"), ConfigError);
    FieldState z(64, 1);
    CHECK_THROWS_AS(normalize_masses(z, g), InvalidInitialData);
  }
}

TEST_CASE("tabulated initial data") {
  const ThetaGrid g = make_theta_grid(8);
  const auto path = std::filesystem::temp_directory_path() / "kuramoto_init_table.csv";
  {
    std::ofstream out(path);
    out << "theta,omega,rho,u\n";
    char buf[128];
    for (std::size_t j = 0; j < 8; ++j) {
      std::snprintf(buf, sizeof buf, "%.17g,0,%.17g,%.17g\n", g.center(j), 1.0 + 0.5 * std::cos(g.center(j)),
                    -std::sin(g.center(j)));
      out << buf;
    }
  }
  const OmegaGrid one = discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5);
  const InitSpec spec = InitSpec::parse("table", "table", path.string());
  const FieldState s = init_state(spec, g, one);
  CHECK(std::abs(s.slice_mass(0, g.spacing()) - 1.0) < 1e-14);
  CHECK(s.u[2] == doctest::Approx(-std::sin(g.center(2))));
  CHECK(s.rho[0] / s.rho[4] == doctest::Approx((1.0 + 0.5 * std::cos(g.center(0))) / (1.0 + 0.5 * std::cos(g.center(4)))));
  const auto slope = initial_velocity_slope(spec, g, one, s);
  CHECK(slope[2] == doctest::Approx((s.u[3] - s.u[1]) / (2 * g.spacing())));
  std::filesystem::remove(path);
}

TEST_CASE("parameters validate") {
  CHECK_THROWS_WITH_AS((Params{-1.0, 0.1}.validate()), "m must be positive", ConfigError);
  CHECK_THROWS_AS((Params{1.0, -0.1}.validate()), ConfigError);
  CHECK_NOTHROW((Params{0.5, 0.0}.validate()));
}
