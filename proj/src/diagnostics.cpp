#include "kuramoto/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "kuramoto/error.hpp"

namespace kuramoto {

namespace {
constexpr double kPi = std::numbers::pi;
}

const std::array<std::string, TimeSeriesRecord::kColumns>& TimeSeriesRecord::columns() {
  static const std::array<std::string, kColumns> names{"t",     "r",   "phi", "Ek",       "Ep",
                                                        "vc",    "etac", "d_eta", "d_v",   "L",
                                                        "mass_err", "min_du", "max_rho", "Ek_integral"};
  return names;
}

std::array<double, TimeSeriesRecord::kColumns> TimeSeriesRecord::values() const {
  return {t, r, phi, Ek, Ep, vc, etac, d_eta, d_v, L, mass_err, min_du, max_rho, Ek_integral};
}

double mean_velocity(const Ensemble& ens) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) s += ens.weight[i] * ens.v[i];
  return s;
}

double mean_phase(const Ensemble& ens) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) s += ens.weight[i] * ens.eta[i];
  return s;
}

Energies energies(const Ensemble& ens, const OrderParam& op, const Params& params) {
  const double vc = mean_velocity(ens);
  double ek = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double dv = ens.v[i] - vc;
    ek += ens.weight[i] * dv * dv;
  }
  return {0.5 * ek, params.K / (2.0 * params.m) * (1.0 - op.r * op.r)};
}

double potential_energy_direct(const Ensemble& ens, const Params& params) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < ens.size(); ++j) row += ens.weight[j] * (1.0 - std::cos(ens.eta[i] - ens.eta[j]));
    s += ens.weight[i] * row;
  }
  return params.K / (2.0 * params.m) * s;
}

double mean_velocity(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega) {
  double s = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    const auto u = state.u_slice(k);
    double m = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) m += rho[j] * u[j];
    s += omega.weights[k] * m;
  }
  return s * grid.spacing();
}

Energies energies(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega, const OrderParam& op,
                  const Params& params) {
  const double vc = mean_velocity(state, grid, omega);
  double s = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    const auto u = state.u_slice(k);
    double m = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) m += rho[j] * (u[j] - vc) * (u[j] - vc);
    s += omega.weights[k] * m;
  }
  return {0.5 * s * grid.spacing(), params.K / (2.0 * params.m) * (1.0 - op.r * op.r)};
}

double lyapunov_L(const Ensemble& ens, const OrderParam& op, const Params& params) {
  double s = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    const double x = ens.v[i] + params.K * op.r * std::sin(ens.eta[i] - op.phi);
    s += ens.weight[i] * x * x;
  }
  return 0.5 * s;
}

Diameters diameters(const Ensemble& ens) {
  double eta_lo = std::numeric_limits<double>::infinity();
  double eta_hi = -eta_lo;
  double v_lo = eta_lo;
  double v_hi = -eta_lo;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    if (!(ens.weight[i] > 0.0)) continue;
    eta_lo = std::min(eta_lo, ens.eta[i]);
    eta_hi = std::max(eta_hi, ens.eta[i]);
    v_lo = std::min(v_lo, ens.v[i]);
    v_hi = std::max(v_hi, ens.v[i]);
  }
  if (eta_lo > eta_hi) throw DomainError("ensemble has no sample of positive weight");
  return {eta_hi - eta_lo, v_hi - v_lo};
}

namespace {

std::vector<char> support_mask(const FieldState& state, double floor) {
  std::vector<char> mask(state.n_theta, 0);
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    for (std::size_t j = 0; j < rho.size(); ++j)
      if (rho[j] > floor) mask[j] = 1;
  }
  return mask;
}

// First cell of the shortest covering arc and its length in cells - 1.
struct Arc {
  std::size_t start = 0;
  std::size_t span = 0;
};

Arc covering_arc(const std::vector<char>& mask) {
  const std::size_t n = mask.size();
  std::vector<std::size_t> cells;
  for (std::size_t j = 0; j < n; ++j)
    if (mask[j]) cells.push_back(j);
  if (cells.empty()) throw DomainError("state has empty support");
  // The arc skips the widest gap between circularly consecutive support cells.
  std::size_t best_gap = cells.front() + n - cells.back();
  std::size_t start = cells.front();
  for (std::size_t i = 1; i < cells.size(); ++i) {
    const std::size_t gap = cells[i] - cells[i - 1];
    if (gap > best_gap) {
      best_gap = gap;
      start = cells[i];
    }
  }
  return {start, n - best_gap};
}

}  // namespace

Diameters diameters(const FieldState& state, const ThetaGrid& grid, double support_floor) {
  const std::vector<char> mask = support_mask(state, support_floor);
  const Arc arc = covering_arc(mask);
  double v_lo = std::numeric_limits<double>::infinity();
  double v_hi = -v_lo;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    const auto u = state.u_slice(k);
    for (std::size_t j = 0; j < rho.size(); ++j) {
      if (!(rho[j] > support_floor)) continue;
      v_lo = std::min(v_lo, u[j]);
      v_hi = std::max(v_hi, u[j]);
    }
  }
  return {static_cast<double>(arc.span) * grid.spacing(), v_hi - v_lo};
}

double mean_phase(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega, double support_floor) {
  const Arc arc = covering_arc(support_mask(state, support_floor));
  const std::size_t n = grid.size();
  const double origin = grid.center(arc.start);
  double s = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    double m = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t offset = (j + n - arc.start) % n;
      m += rho[j] * (origin + static_cast<double>(offset) * grid.spacing());
    }
    s += omega.weights[k] * m;
  }
  return s * grid.spacing();
}

double mass_error(const FieldState& state, const ThetaGrid& grid) {
  double err = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) err = std::max(err, std::abs(state.slice_mass(k, grid.spacing()) - 1.0));
  return err;
}

EnvelopeParams make_envelope(double d_eta0, double d_v0, const Params& params) {
  EnvelopeParams env;
  env.C0 = std::max(d_eta0, d_eta0 + params.m * d_v0);
  if (!(env.C0 > 0.0 && env.C0 < kPi)) throw NotApplicable("diameter envelopes need 0 < C0 < pi");
  env.D0 = std::sin(env.C0) / env.C0;
  const double disc = 1.0 - 4.0 * params.m * params.K * env.D0;
  env.C2 = d_eta0 / (2.0 * params.m) + d_v0;
  if (disc > 0.0) {
    env.regime = DampingRegime::overdamped;
    const double root = std::sqrt(disc);
    env.nu1 = (1.0 + root) / (2.0 * params.m);
    env.nu2 = (1.0 - root) / (2.0 * params.m);
    env.C1 = params.m * (d_v0 + env.nu1 * d_eta0) / root;
  } else {
    env.regime = DampingRegime::underdamped;
    env.nu1 = env.nu2 = 1.0 / (2.0 * params.m);
  }
  return env;
}

double phase_envelope(const EnvelopeParams& env, double d_eta0, double d_v0, const Params& params, double t) {
  return gronwall_bound(params.m, 1.0, params.K * env.D0, d_eta0, d_v0, t);
}

double velocity_envelope(const EnvelopeParams& env, double d_eta0, double d_v0, const Params& params, double t) {
  const double m = params.m;
  const double K = params.K;
  const double relax = std::exp(-t / m);
  if (K == 0.0) return d_v0 * relax;
  if (env.regime == DampingRegime::overdamped) {
    const double a1 = K * (env.C1 - d_eta0) / (1.0 - m * env.nu1);
    const double a2 = K * env.C1 / (1.0 - m * env.nu2);
    return (d_v0 + a1 - a2) * relax + a2 * std::exp(-env.nu2 * t) - a1 * std::exp(-env.nu1 * t);
  }
  return (1.0 + 4.0 * K * m) * d_v0 * relax + (2.0 * K * env.C2 * t - 4.0 * K * m * d_v0) * std::exp(-t / (2.0 * m));
}

double gronwall_bound(double a, double b, double c, double x0, double x1, double t) {
  if (!(a > 0.0)) throw DomainError("gronwall_bound needs a > 0");
  const double disc = b * b - 4.0 * a * c;
  if (disc > 0.0) {
    const double root = std::sqrt(disc);
    const double alpha1 = (b + root) / (2.0 * a);
    const double alpha2 = (b - root) / (2.0 * a);
    return x0 * std::exp(-alpha1 * t) + a * (x1 + alpha1 * x0) * (std::exp(-alpha2 * t) - std::exp(-alpha1 * t)) / root;
  }
  const double rate = b / (2.0 * a);
  return std::exp(-rate * t) * (x0 + (rate * x0 + x1) * t);
}

RInfinity r_infinity_prediction(double r0, double Ek0, double Ek_integral, const Params& params) {
  if (!(params.K > 0.0)) throw DomainError("the asymptotic order parameter needs K > 0");
  RInfinity out;
  out.radicand = r0 * r0 - 2.0 * params.m / params.K * Ek0 + 4.0 / params.K * Ek_integral;
  out.consistent = out.radicand >= -1e-10;
  out.value = std::sqrt(std::max(0.0, out.radicand));
  return out;
}

DiracDistance dirac_distance_bound(const Ensemble& ens, double etac0, double vc0, const Params& params) {
  const double eta_inf = etac0 + params.m * vc0;
  DiracDistance out;
  for (std::size_t i = 0; i < ens.size(); ++i) out.measured += ens.weight[i] * std::abs(ens.eta[i] - eta_inf);
  out.bound = diameters(ens).d_eta + params.m * std::abs(vc0) * std::exp(-ens.t / params.m);
  return out;
}

BlowupMonitor::BlowupMonitor(double max_rho0, const SchemeConfig& config)
    : max_rho0_(max_rho0), rho_factor_(config.blowup_rho_factor), grad_(config.blowup_grad) {}

bool BlowupMonitor::update(double t, double max_rho, double min_du, bool nonfinite) {
  if (fired_) return true;
  if (nonfinite || !std::isfinite(max_rho) || !std::isfinite(min_du)) {
    reason_ = "nonfinite";
  } else if (max_rho > rho_factor_ * max_rho0_) {
    reason_ = "density";
  } else if (min_du < -grad_) {
    reason_ = "gradient";
  } else {
    return false;
  }
  fired_ = t;
  return true;
}

bool BlowupMonitor::update(const FieldState& state, const ThetaGrid& grid) {
  return update(state.t, max_density(state), min_slope(state, grid), false);
}

bool BlowupMonitor::update(const Ensemble& ens) {
  double max_rho = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i)
    if (ens.weight[i] > 0.0) max_rho = std::max(max_rho, std::exp(ens.log_rho[i]));
  if (ens.blown_up && !fired_) {
    fired_ = ens.blowup_time;
    reason_ = "gradient";
  }
  if (fired_) return true;
  return update(ens.t, max_rho, min_slope(ens), false);
}

double TrapezoidIntegral::add(double t, double value) {
  if (started_) sum_ += 0.5 * (t - t_) * (value + f_);
  started_ = true;
  t_ = t;
  f_ = value;
  return sum_;
}

double max_density(const FieldState& state) {
  double m = 0.0;
  for (double r : state.rho) {
    if (!std::isfinite(r)) return r;
    m = std::max(m, r);
  }
  return m;
}

double min_slope(const FieldState& state, const ThetaGrid& grid) {
  const std::vector<double> s = centered_slope(state, grid);
  double m = std::numeric_limits<double>::infinity();
  for (double x : s) {
    if (!std::isfinite(x)) return std::numeric_limits<double>::quiet_NaN();
    m = std::min(m, x);
  }
  return m;
}

double min_slope(const Ensemble& ens) {
  double m = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < ens.size(); ++i) {
    if (!(ens.weight[i] > 0.0)) continue;
    m = std::min(m, ens.d[i]);
  }
  return m;
}

TimeSeriesRecord make_record(const Ensemble& ens, const OrderParam& op, const Params& params) {
  TimeSeriesRecord rec;
  rec.t = ens.t;
  rec.r = op.r;
  rec.phi = op.phi;
  const Energies e = energies(ens, op, params);
  rec.Ek = e.Ek;
  rec.Ep = e.Ep;
  rec.vc = mean_velocity(ens);
  rec.etac = mean_phase(ens);
  const Diameters d = diameters(ens);
  rec.d_eta = d.d_eta;
  rec.d_v = d.d_v;
  rec.L = lyapunov_L(ens, op, params);
  double mass = 0.0;
  for (double w : ens.weight) mass += w;
  rec.mass_err = std::abs(mass - 1.0);
  rec.min_du = min_slope(ens);
  rec.max_rho = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i)
    if (ens.weight[i] > 0.0) rec.max_rho = std::max(rec.max_rho, std::exp(ens.log_rho[i]));
  return rec;
}

TimeSeriesRecord make_record(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega,
                             const OrderParam& op, const Params& params, double support_floor) {
  TimeSeriesRecord rec;
  rec.t = state.t;
  rec.r = op.r;
  rec.phi = op.phi;
  const Energies e = energies(state, grid, omega, op, params);
  rec.Ek = e.Ek;
  rec.Ep = e.Ep;
  rec.vc = mean_velocity(state, grid, omega);
  rec.etac = mean_phase(state, grid, omega, support_floor);
  const Diameters d = diameters(state, grid, support_floor);
  rec.d_eta = d.d_eta;
  rec.d_v = d.d_v;
  double L = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    const auto u = state.u_slice(k);
    double s = 0.0;
    for (std::size_t j = 0; j < grid.size(); ++j) {
      const double x = u[j] + params.K * op.r * std::sin(grid.center(j) - op.phi);
      s += rho[j] * x * x;
    }
    L += omega.weights[k] * s;
  }
  rec.L = 0.5 * L * grid.spacing();
  rec.mass_err = mass_error(state, grid);
  rec.min_du = min_slope(state, grid);
  rec.max_rho = max_density(state);
  return rec;
}

}  // namespace kuramoto
