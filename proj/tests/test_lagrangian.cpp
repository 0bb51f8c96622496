#include <cmath>
#include <numeric>
#include <sstream>

#include "doctest.h"
#include "kuramoto/domain.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/lagrangian.hpp"
#include "oracles.hpp"

using namespace kuramoto;
using oracle::kPi;

namespace {

OmegaGrid dirac() { return discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5); }

double total_weight(const Ensemble& e) { return std::accumulate(e.weight.begin(), e.weight.end(), 0.0); }

}  // namespace

TEST_CASE("sampling symbolic initial data") {
  SUBCASE("uniform density gives equal weights") {
    const Ensemble e = sample_initial(InitSpec::parse("uniform", "0"), dirac(), 8);
    REQUIRE(e.size() == 8);
    for (double w : e.weight) CHECK(w == doctest::Approx(1.0 / 8).epsilon(1e-15));
    CHECK(e.periodic);
  }

  SUBCASE("slopes are exact") {
    const Ensemble e = sample_initial(InitSpec::parse("uniform", "-sin(theta)"), dirac(), 64);
    for (std::size_t i = 0; i < e.size(); ++i) CHECK(e.d[i] == doctest::Approx(-std::cos(e.theta0[i])).epsilon(1e-15));
    const Ensemble c = sample_initial(InitSpec::parse("uniform(-0.5, 0.5)", "-sin(theta)"), dirac(), 9);
    CHECK(!c.periodic);
    CHECK(c.theta0.front() == -0.5);
    CHECK(c.theta0.back() == 0.5);
    CHECK(c.theta0[4] == 0.0);
    CHECK(c.d[4] == -1.0);
  }

  SUBCASE("truncated Gaussian weights match cell quadrature") {
    const std::size_t n = 512;
    const Ensemble e = sample_initial(InitSpec::parse("gaussian(0, 1)", "0"), dirac(), n);
    const auto f = [](double x) { return std::exp(-x * x / 2); };
    const double mass = oracle::simpson(f, -kPi, kPi, 20000);
    const double h = 2 * kPi / n;
    double worst = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      const double a = -kPi + static_cast<double>(i) * h;
      worst = std::max(worst, std::abs(e.weight[i] - oracle::simpson(f, a, a + h, 10) / mass));
    }
    CHECK(worst < 1e-6);
    CHECK(std::abs(total_weight(e) - 1.0) < 1e-14);
  }

  SUBCASE("frequency slices carry their probability weights") {
    const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 6, 4);
    const Ensemble e = sample_initial(InitSpec::parse("gaussian(0, 1)", "omega - sin(theta)"), w, 32);
    REQUIRE(e.slices() == 6);
    for (std::size_t k = 0; k < 6; ++k) {
      double s = 0.0;
      for (std::size_t i = e.slice_begin[k]; i < e.slice_begin[k + 1]; ++i) {
        s += e.weight[i];
        CHECK(e.omega[i] == w.nodes[k]);
      }
      CHECK(s == doctest::Approx(w.weights[k]).epsilon(1e-14));
    }
  }

  SUBCASE("sampling a discrete state interpolates it") {
    const ThetaGrid g = make_theta_grid(100);
    const FieldState s = init_state(InitSpec::parse("gaussian(0, 1)", "-sin(theta)"), g, dirac());
    const Ensemble e = sample_initial(s, g, dirac(), 100);
    for (std::size_t i = 0; i < 100; ++i) {
      CHECK(e.theta0[i] == doctest::Approx(g.center(i)).epsilon(1e-14));
      CHECK(e.v[i] == doctest::Approx(s.u[i]).epsilon(1e-12));
    }
    CHECK(std::abs(total_weight(e) - 1.0) < 1e-14);
  }

  CHECK_THROWS_AS(sample_initial(InitSpec::parse("uniform", "0"), dirac(), 1), DomainError);
}

TEST_CASE("a lone cluster evolves in closed form") {
  // Self-interaction vanishes: r = 1 and phi = eta.
  const Params p{0.5, 3.0};
  Ensemble e = sample_initial(InitSpec::parse("dirac(0.3)", "0.7"), dirac(), 2);
  // The synthetic gradient d still obeys a Riccati law and may trip the
  // blow-up flag; the closed form holds up to whatever time was reached.
  evolve(e, p, 2.0, {1e-3, 1e-6});
  REQUIRE(e.t > 0.5);
  const double decay = std::exp(-e.t / p.m);
  CHECK(std::abs(e.v[0] - 0.7 * decay) < 1e-12);
  CHECK(std::abs(e.eta[0] - (0.3 + p.m * 0.7 * (1 - decay))) < 1e-12);
}

TEST_CASE("d = -1/m is a fixed point without coupling") {
  const Params p{0.5, 0.0};
  Ensemble e = sample_initial(InitSpec::parse("uniform(-1, 1)", "-2*theta"), dirac(), 11);
  evolve(e, p, 3.0, {1e-3, 1e-6});
  for (double d : e.d) CHECK(std::abs(d + 2.0) < 1e-12);
}

TEST_CASE("the mean velocity decays as v_c(0) e^{-t/m}") {
  const Params p{0.5, 0.1};
  Ensemble e = sample_initial(InitSpec::parse("gaussian(0, 1)", "-sin(theta) + 0.5"), dirac(), 512);
  double vc0 = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) vc0 += e.weight[i] * e.v[i];
  REQUIRE(std::abs(vc0 - 0.5) < 1e-12);
  double worst = 0.0;
  evolve(e, p, 5.0, {1e-3, 1e-6}, [&](const Ensemble& s, const OrderParam&) {
    double vc = 0.0;
    for (std::size_t i = 0; i < s.size(); ++i) vc += s.weight[i] * s.v[i];
    worst = std::max(worst, std::abs(vc - vc0 * std::exp(-s.t / p.m)));
    return true;
  });
  CHECK(worst < 1e-8);
}

TEST_CASE("RK4 density and gradient follow the characteristic ODEs") {
  // Along a characteristic (log rho)' = -d; with K = 0 the Riccati equation
  // d' = -d^2 - d/m has the closed form d(t) = d0 a / ((a + d0) e^{a t} - d0), a = 1/m.
  const Params p{2.0, 0.0};
  Ensemble e = sample_initial(InitSpec::parse("uniform", "0.3*sin(theta)"), dirac(), 16);
  const Ensemble start = e;
  evolve(e, p, 1.5, {1e-3, 1e-6});
  const double a = 1.0 / p.m;
  for (std::size_t i = 0; i < e.size(); ++i) {
    const double d0 = start.d[i];
    const double ea = std::exp(a * 1.5);
    const double d = d0 * a / ((a + d0) * ea - d0);
    CHECK(std::abs(e.d[i] - d) < 1e-10);
    // log rho(t) - log rho0 = -int d = -log(((a + d0) e^{at} - d0) / a) + a t
    const double lr = start.log_rho[i] - std::log(((a + d0) * ea - d0) / a) + a * 1.5;
    CHECK(std::abs(e.log_rho[i] - lr) < 1e-10);
  }
}

TEST_CASE("supercritical data blows up before the comparison bound") {
  const Params p{1.0, 1.0};
  Ensemble e = sample_initial(InitSpec::parse("gaussian(0, 1)", "-2*sin(theta)"), dirac(), 512);
  evolve(e, p, 5.0, {1e-3, 1e-6});
  CHECK(e.blown_up);
  CHECK(e.blowup_time <= 2.62);
  CHECK(e.t == doctest::Approx(e.blowup_time));
  CHECK(std::abs(e.theta0[e.blowup_sample]) < 0.1);
}

TEST_CASE("non-finite states raise an integration failure") {
  Ensemble e = sample_initial(InitSpec::parse("uniform", "0"), dirac(), 8);
  e.v[3] = std::nan("");
  try {
    evolve(e, {1.0, 1.0}, 1.0, {1e-3, 1e-6});
    FAIL("expected IntegrationFailure");
  } catch (const IntegrationFailure& f) {
    CHECK(f.last_valid_time() == 0.0);
  }
}

TEST_CASE("pushforward density") {
  const ThetaGrid g = make_theta_grid(200);
  SUBCASE("at t = 0 it recovers rho0 to grid accuracy") {
    const InitSpec spec = InitSpec::parse("gaussian(0, 1)", "0");
    const Ensemble e = sample_initial(spec, dirac(), 3200);
    const auto rho = pushforward_density(e, g);
    const FieldState ref = init_state(spec, g, dirac());
    double l1 = 0.0, mass = 0.0;
    for (std::size_t j = 0; j < 200; ++j) {
      l1 += std::abs(rho[j] - ref.rho[j]) * g.spacing();
      mass += rho[j] * g.spacing();
    }
    CHECK(l1 < g.spacing());
    CHECK(std::abs(mass - 1.0) < 1e-13);
  }
  SUBCASE("a collapsed ensemble is a single-cell spike of mass one") {
    Ensemble e = sample_initial(InitSpec::parse("uniform(-1, 1)", "0"), dirac(), 50);
    std::fill(e.eta.begin(), e.eta.end(), g.center(77) + 2 * kPi);
    const auto rho = pushforward_density(e, g);
    CHECK(rho[77] * g.spacing() == doctest::Approx(1.0).epsilon(1e-13));
    double rest = 0.0;
    for (std::size_t j = 0; j < 200; ++j)
      if (j != 77) rest += rho[j];
    CHECK(rest == 0.0);
  }
  SUBCASE("cell velocities are mass-weighted means") {
    Ensemble e = sample_initial(InitSpec::parse("uniform", "0.25"), dirac(), 400);
    const PushforwardFields f = pushforward_fields(e, g);
    for (double u : f.u) CHECK(u == doctest::Approx(0.25).epsilon(1e-13));
  }
}

TEST_CASE("trajectory output") {
  Ensemble e = sample_initial(InitSpec::parse("uniform", "0"), dirac(), 4);
  std::ostringstream out;
  write_trajectory_header(out);
  write_trajectory_rows(out, e);
  std::istringstream in(out.str());
  std::string line;
  int lines = 0;
  while (std::getline(in, line)) ++lines;
  CHECK(lines == 5);
  CHECK(out.str().rfind("t,", 0) == 0);
}
