#include <cmath>
#include <random>

#include "doctest.h"
#include "kuramoto/domain.hpp"
#include "kuramoto/nonlocal.hpp"
#include "oracles.hpp"

using namespace kuramoto;
using oracle::kPi;

namespace {

OmegaGrid dirac() { return discretize_frequency(FrequencySpec::parse("dirac(0)"), 1, 5); }

FieldState random_state(std::size_t n, const OmegaGrid& w, unsigned seed) {
  auto gen = oracle::rng(seed);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  FieldState s(n, w.size());
  for (auto& r : s.rho) r = U(gen);
  for (auto& u : s.u) u = U(gen) - 0.5;
  normalize_masses(s, make_theta_grid(n));
  return s;
}

}  // namespace

TEST_CASE("order parameter of elementary states") {
  const ThetaGrid g = make_theta_grid(128);
  const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 7, 5);
  FieldState s(128, 7);
  for (auto& r : s.rho) r = 1 / (2 * kPi);
  OrderParam op = order_parameter(s, g, w);
  CHECK(op.r < 1e-14);
  CHECK(op.phi == 0.0);

  FieldState p(128, 1);
  p.rho[37] = 1 / g.spacing();
  op = order_parameter(p, g, dirac());
  CHECK(std::abs(op.r - 1.0) < 1e-12);
  CHECK(std::abs(op.phi - g.center(37)) < 1e-12);
}

TEST_CASE("order parameter of the truncated Gaussian against fine quadrature") {
  const ThetaGrid g = make_theta_grid(1000);
  const FieldState s = init_state(InitSpec::parse("gaussian(0, 1)", "-sin(theta)"), g, dirac());
  const OrderParam op = order_parameter(s, g, dirac());
  // Midpoint rule at ten times the resolution, normalised the same way.
  double mass = 0.0;
  double c = 0.0;
  const auto fine = oracle::centres(10000);
  for (double th : fine) {
    mass += std::exp(-th * th / 2);
    c += std::cos(th) * std::exp(-th * th / 2);
  }
  CHECK(std::abs(op.r - c / mass) < 1e-6);
  CHECK(std::abs(op.S) < 1e-15);
}

TEST_CASE("factorised force equals the direct double sum") {
  const ThetaGrid g = make_theta_grid(64);
  const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 8, 3);
  const FieldState s = random_state(64, w, 7);
  const Params params{0.7, 1.3};
  const OrderParam op = order_parameter(s, g, w);
  double worst_sin = 0.0;
  double worst_cos = 0.0;
  for (std::size_t i = 0; i < 64; ++i) {
    const double th = g.center(i);
    double fs = 0.0;
    double fc = 0.0;
    for (std::size_t k = 0; k < 8; ++k)
      for (std::size_t j = 0; j < 64; ++j) {
        fs += std::sin(g.center(j) - th) * s.rho[k * 64 + j] * w.weights[k];
        fc += std::cos(g.center(j) - th) * s.rho[k * 64 + j] * w.weights[k];
      }
    fs *= params.K * g.spacing();
    fc *= g.spacing();
    worst_sin = std::max(worst_sin, std::abs(mean_field_force(op, th, params) - fs));
    worst_cos = std::max(worst_cos, std::abs(mean_field_cos(op, th) - fc));
  }
  CHECK(worst_sin < 1e-12);
  CHECK(worst_cos < 1e-12);
}

TEST_CASE("force extremes") {
  const Params params{1.0, 2.0};
  const OrderParam op = OrderParam::from_moments(0.3 * std::cos(0.4), 0.3 * std::sin(0.4));
  CHECK(op.r == doctest::Approx(0.3));
  CHECK(op.phi == doctest::Approx(0.4));
  CHECK(std::abs(mean_field_force(op, 0.4, params)) < 1e-15);
  CHECK(mean_field_force(op, 0.4 - kPi / 2, params) == doctest::Approx(2.0 * 0.3));
  const OrderParam zero = OrderParam::from_moments(0.0, 0.0);
  CHECK(mean_field_force(zero, 1.1, params) == 0.0);
  CHECK(mean_field_cos(zero, 1.1) == 0.0);
  CHECK(mean_field_cos(op, 0.4) == doctest::Approx(0.3));
}

TEST_CASE("slice moments combine in the same order as the direct sum") {
  const ThetaGrid g = make_theta_grid(50);
  const OmegaGrid w = discretize_frequency(FrequencySpec::parse("normal(0, 1)"), 4, 3);
  const FieldState s = random_state(50, w, 3);
  std::vector<double> cs(4), ss(4);
  for (std::size_t k = 0; k < 4; ++k)
    for (std::size_t j = 0; j < 50; ++j) {
      cs[k] += g.cos_centers()[j] * s.rho[k * 50 + j];
      ss[k] += g.sin_centers()[j] * s.rho[k * 50 + j];
    }
  const OrderParam a = combine_slice_moments(cs, ss, w, g.spacing());
  const OrderParam b = order_parameter(s, g, w);
  CHECK(a.C == b.C);
  CHECK(a.S == b.S);
}
