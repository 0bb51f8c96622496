#include "kuramoto/lagrangian.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <ostream>
#include <utility>

#include "kuramoto/error.hpp"
#include "kuramoto/io.hpp"
#include "kuramoto/parallel.hpp"

namespace kuramoto {

CharSample Ensemble::sample(std::size_t i) const {
  return {theta0[i], omega[i], weight[i], eta[i], v[i], d[i], log_rho[i]};
}

namespace {

constexpr double kPi = std::numbers::pi;

void reserve_all(Ensemble& e, std::size_t n) {
  for (auto* a : {&e.theta0, &e.omega, &e.weight, &e.eta, &e.v, &e.d, &e.log_rho, &e.v0, &e.d0}) a->reserve(n);
}

void push(Ensemble& e, double theta0, double Omega, double weight, double v, double d, double log_rho) {
  e.theta0.push_back(theta0);
  e.omega.push_back(Omega);
  e.weight.push_back(weight);
  e.eta.push_back(theta0);
  e.v.push_back(v);
  e.d.push_back(d);
  e.log_rho.push_back(log_rho);
  e.v0.push_back(v);
  e.d0.push_back(d);
}

double log_or_minus_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

}  // namespace

Ensemble sample_initial(const InitSpec& spec, const OmegaGrid& omega, std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("at least two samples per frequency are required");
  if (spec.rho0.kind == DensityProfile::Kind::table || !spec.u0.symbolic())
    throw InvalidInitialData("tabulated profiles must be sampled from a discretised state");

  const bool dirac = spec.rho0.kind == DensityProfile::Kind::dirac;
  Ensemble ens;
  ens.periodic = !dirac && !spec.rho0.compact();
  std::vector<double> nodes(n_samples);
  double spacing;
  if (dirac) {
    std::fill(nodes.begin(), nodes.end(), spec.rho0.mu);
    spacing = 1.0;
  } else if (ens.periodic) {
    spacing = 2.0 * kPi / static_cast<double>(n_samples);
    for (std::size_t i = 0; i < n_samples; ++i) nodes[i] = -kPi + (static_cast<double>(i) + 0.5) * spacing;
  } else {
    spacing = (spec.rho0.hi - spec.rho0.lo) / static_cast<double>(n_samples - 1);
    for (std::size_t i = 0; i < n_samples; ++i) nodes[i] = spec.rho0.lo + static_cast<double>(i) * spacing;
    nodes.back() = spec.rho0.hi;
  }

  reserve_all(ens, n_samples * omega.size());
  ens.slice_begin.push_back(0);
  std::vector<double> raw(n_samples);
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double Omega = omega.nodes[k];
    double total = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      raw[i] = dirac ? 1.0 : spec.rho0(nodes[i], Omega);
      if (!(raw[i] >= 0.0) || !std::isfinite(raw[i]))
        throw InvalidInitialData("initial density must be finite and nonnegative");
      total += raw[i];
    }
    if (!(total > 0.0)) throw DegenerateDistribution("initial density has zero total weight");
    const double mass = total * spacing;
    for (std::size_t i = 0; i < n_samples; ++i) {
      const Dual u = spec.u0.eval(nodes[i], Omega);
      const double log_rho = dirac ? std::numeric_limits<double>::infinity() : log_or_minus_inf(raw[i] / mass);
      push(ens, nodes[i], Omega, (raw[i] / total) * omega.weights[k], u.value, u.slope, log_rho);
    }
    ens.slice_begin.push_back(ens.size());
  }
  return ens;
}

Ensemble sample_initial(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega,
                        std::size_t n_samples) {
  if (n_samples < 2) throw DomainError("at least two samples per frequency are required");
  if (state.n_theta != grid.size() || state.n_omega != omega.size())
    throw GridMismatch("state does not match the grids");
  const std::size_t n = grid.size();
  const double dx = grid.spacing();
  const std::vector<double> slope = centered_slope(state, grid);
  const double spacing = 2.0 * kPi / static_cast<double>(n_samples);

  Ensemble ens;
  ens.periodic = true;
  ens.t = state.t;
  reserve_all(ens, n_samples * omega.size());
  ens.slice_begin.push_back(0);
  std::vector<double> rho(n_samples), u(n_samples), d(n_samples), nodes(n_samples);
  for (std::size_t k = 0; k < omega.size(); ++k) {
    const auto r = state.rho_slice(k);
    const auto uk = state.u_slice(k);
    const double* sk = slope.data() + k * n;
    double total = 0.0;
    for (std::size_t i = 0; i < n_samples; ++i) {
      nodes[i] = -kPi + (static_cast<double>(i) + 0.5) * spacing;
      // Fractional cell coordinate measured from the first centre.
      const double x = (nodes[i] - grid.center(0)) / dx;
      const double fl = std::floor(x);
      const double f = x - fl;
      const std::size_t j0 = grid.wrap(static_cast<std::ptrdiff_t>(fl));
      const std::size_t j1 = grid.wrap(static_cast<std::ptrdiff_t>(fl) + 1);
      rho[i] = (1.0 - f) * r[j0] + f * r[j1];
      u[i] = (1.0 - f) * uk[j0] + f * uk[j1];
      d[i] = (1.0 - f) * sk[j0] + f * sk[j1];
      total += rho[i];
    }
    if (!(total > 0.0)) throw DegenerateDistribution("state slice has zero total weight");
    const double mass = total * spacing;
    for (std::size_t i = 0; i < n_samples; ++i)
      push(ens, nodes[i], omega.nodes[k], (rho[i] / total) * omega.weights[k], u[i], d[i],
           log_or_minus_inf(rho[i] / mass));
    ens.slice_begin.push_back(ens.size());
  }
  return ens;
}

OrderParam ensemble_order(const Ensemble& ens) {
  double C = 0.0;
  double S = 0.0;
  for (std::size_t i = 0; i < ens.size(); ++i) {
    C += ens.weight[i] * std::cos(ens.eta[i]);
    S += ens.weight[i] * std::sin(ens.eta[i]);
  }
  return OrderParam::from_moments(C, S);
}

namespace {

constexpr std::size_t kBlock = 2048;

template <class F>
void for_blocks(std::size_t n, F&& body) {
  const std::size_t blocks = (n + kBlock - 1) / kBlock;
  parallel_for(blocks, [&](std::size_t b) {
    const std::size_t end = std::min(n, (b + 1) * kBlock);
    for (std::size_t i = b * kBlock; i < end; ++i) body(i);
  });
}

struct Rk4Work {
  std::vector<double> cos_eta, sin_eta;
  std::vector<double> eta, v, d, lr;  // stage state
  std::vector<double> acc_eta, acc_v, acc_d, acc_lr;
  std::vector<double> k_eta, k_v, k_d, k_lr;

  explicit Rk4Work(std::size_t n)
      : cos_eta(n), sin_eta(n), eta(n), v(n), d(n), lr(n), acc_eta(n), acc_v(n), acc_d(n), acc_lr(n),
        k_eta(n), k_v(n), k_d(n), k_lr(n) {}
};

// Trig tables of eta, then the ordered weighted sum.
OrderParam stage_order(const std::vector<double>& eta, const std::vector<double>& weight, Rk4Work& w) {
  for_blocks(eta.size(), [&](std::size_t i) {
    w.cos_eta[i] = std::cos(eta[i]);
    w.sin_eta[i] = std::sin(eta[i]);
  });
  double C = 0.0;
  double S = 0.0;
  for (std::size_t i = 0; i < eta.size(); ++i) {
    C += weight[i] * w.cos_eta[i];
    S += weight[i] * w.sin_eta[i];
  }
  return OrderParam::from_moments(C, S);
}

void stage_derivative(const Ensemble& ens, const Params& p, const OrderParam& op, const std::vector<double>& v,
                      const std::vector<double>& d, Rk4Work& w) {
  const double inv_m = 1.0 / p.m;
  for_blocks(v.size(), [&](std::size_t i) {
    const double c = w.cos_eta[i];
    const double s = w.sin_eta[i];
    w.k_eta[i] = v[i];
    w.k_v[i] = inv_m * ((ens.omega[i] - v[i]) + p.K * (op.S * c - op.C * s));
    w.k_d[i] = -d[i] * d[i] - d[i] * inv_m - p.K * inv_m * (op.C * c + op.S * s);
    w.k_lr[i] = -d[i];
  });
}

}  // namespace

void evolve(Ensemble& ens, const Params& params, double T, const OracleConfig& config,
            const OracleObserver& observer) {
  params.validate();
  if (!(config.dt > 0.0)) throw DomainError("oracle time step must be positive");
  if (!(config.eps_blow > 0.0)) throw DomainError("eps_blow must be positive");
  const std::size_t n = ens.size();
  const double d_floor = -1.0 / config.eps_blow;
  Rk4Work w(n);

  OrderParam op = stage_order(ens.eta, ens.weight, w);
  if (observer && !observer(ens, op)) return;
  if (ens.blown_up) return;

  const double t_start = ens.t;
  for (std::size_t step = 1; ens.t < T; ++step) {
    const double t_next = std::min(T, t_start + static_cast<double>(step) * config.dt);
    const double h = t_next - ens.t;
    if (!(h > 0.0)) break;

    // Stage 1 reuses the trig tables of the current state.
    stage_derivative(ens, params, op, ens.v, ens.d, w);
    const double coeff[3] = {0.5 * h, 0.5 * h, h};
    const double acc_w[4] = {1.0, 2.0, 2.0, 1.0};
    for_blocks(n, [&](std::size_t i) {
      w.acc_eta[i] = w.k_eta[i];
      w.acc_v[i] = w.k_v[i];
      w.acc_d[i] = w.k_d[i];
      w.acc_lr[i] = w.k_lr[i];
    });
    for (int s = 0; s < 3; ++s) {
      const double c = coeff[s];
      for_blocks(n, [&](std::size_t i) {
        w.eta[i] = ens.eta[i] + c * w.k_eta[i];
        w.v[i] = ens.v[i] + c * w.k_v[i];
        w.d[i] = ens.d[i] + c * w.k_d[i];
        w.lr[i] = ens.log_rho[i] + c * w.k_lr[i];
      });
      const OrderParam stage_op = stage_order(w.eta, ens.weight, w);
      stage_derivative(ens, params, stage_op, w.v, w.d, w);
      const double a = acc_w[s + 1];
      for_blocks(n, [&](std::size_t i) {
        w.acc_eta[i] += a * w.k_eta[i];
        w.acc_v[i] += a * w.k_v[i];
        w.acc_d[i] += a * w.k_d[i];
        w.acc_lr[i] += a * w.k_lr[i];
      });
    }

    const double h6 = h / 6.0;
    bool finite = true;
    for (std::size_t i = 0; i < n; ++i) {
      w.eta[i] = ens.eta[i] + h6 * w.acc_eta[i];
      w.v[i] = ens.v[i] + h6 * w.acc_v[i];
      if (!std::isfinite(w.eta[i]) || !std::isfinite(w.v[i])) finite = false;
    }
    if (!finite) throw IntegrationFailure("oracle produced a non-finite phase or velocity", ens.t);
    for (std::size_t i = 0; i < n; ++i) {
      ens.d[i] += h6 * w.acc_d[i];
      ens.log_rho[i] += h6 * w.acc_lr[i];
    }
    std::swap(ens.eta, w.eta);
    std::swap(ens.v, w.v);
    ens.t = t_next;

    for (std::size_t i = 0; i < n; ++i) {
      if (!(ens.d[i] >= d_floor)) {
        ens.blown_up = true;
        ens.blowup_time = ens.t;
        ens.blowup_sample = i;
        break;
      }
    }
    op = stage_order(ens.eta, ens.weight, w);
    if (observer && !observer(ens, op)) return;
    if (ens.blown_up) return;
  }
}

PushforwardFields pushforward_fields(const Ensemble& ens, const ThetaGrid& grid) {
  const std::size_t n = grid.size();
  const double dx = grid.spacing();
  std::vector<double> out(n * ens.slices(), 0.0);
  std::vector<double> mom(n * ens.slices(), 0.0);
  const auto wrap_cell = [n](long long c) {
    const long long m = static_cast<long long>(n);
    return static_cast<std::size_t>(((c % m) + m) % m);
  };

  for (std::size_t k = 0; k < ens.slices(); ++k) {
    double* rho = out.data() + k * n;
    double* p = mom.data() + k * n;
    const std::size_t b = ens.slice_begin[k];
    const std::size_t e = ens.slice_begin[k + 1];
    const std::size_t count = e - b;
    for (std::size_t i = b; i < e; ++i) {
      const double w = ens.weight[i];
      if (w == 0.0) continue;
      const double eta = ens.eta[i];
      double left;
      double right;
      if (count == 1) {
        left = right = eta;
      } else {
        // Neighbour phases, shifted by a full turn across the seam when the
        // samples tile the circle; mirrored at the ends of a compact support.
        double prev;
        double next;
        if (i > b) {
          prev = ens.eta[i - 1];
        } else if (ens.periodic) {
          prev = ens.eta[e - 1] - 2.0 * kPi;
        } else {
          prev = 2.0 * eta - ens.eta[i + 1];
        }
        if (i + 1 < e) {
          next = ens.eta[i + 1];
        } else if (ens.periodic) {
          next = ens.eta[b] + 2.0 * kPi;
        } else {
          next = 2.0 * eta - ens.eta[i - 1];
        }
        left = 0.5 * (prev + eta);
        right = 0.5 * (eta + next);
        if (left > right) std::swap(left, right);
      }
      const double a = (left + kPi) / dx;
      const double z = (right + kPi) / dx;
      const double len = z - a;
      if (len < 1e-12) {
        const std::size_t cell = wrap_cell(static_cast<long long>(std::floor(a)));
        rho[cell] += w;
        p[cell] += w * ens.v[i];
        continue;
      }
      const long long c0 = static_cast<long long>(std::floor(a));
      const long long c1 = static_cast<long long>(std::floor(z));
      for (long long c = c0; c <= c1; ++c) {
        const double lo = std::max(a, static_cast<double>(c));
        const double hi = std::min(z, static_cast<double>(c + 1));
        if (hi > lo) {
          const double share = w * (hi - lo) / len;
          rho[wrap_cell(c)] += share;
          p[wrap_cell(c)] += share * ens.v[i];
        }
      }
    }
    // Weights carry the slice's g-weight; divide it back out so every slice
    // is a density of unit mass.
    double slice_weight = 0.0;
    for (std::size_t i = b; i < e; ++i) slice_weight += ens.weight[i];
    const double scale = slice_weight > 0.0 ? 1.0 / (slice_weight * dx) : 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      p[j] = rho[j] > 0.0 ? p[j] / rho[j] : 0.0;
      rho[j] *= scale;
    }
  }
  return {std::move(out), std::move(mom)};
}

std::vector<double> pushforward_density(const Ensemble& ens, const ThetaGrid& grid) {
  return pushforward_fields(ens, grid).rho;
}


void write_trajectory_header(std::ostream& out) { out << "t,sample_id,eta,v,d,log_rho\n"; }

void write_trajectory_rows(std::ostream& out, const Ensemble& ens) {
  const std::string t = io::format_double(ens.t);
  for (std::size_t i = 0; i < ens.size(); ++i) {
    out << t << ',' << i << ',' << io::format_double(ens.eta[i]) << ',' << io::format_double(ens.v[i]) << ','
        << io::format_double(ens.d[i]) << ',' << io::format_double(ens.log_rho[i]) << '\n';
  }
}

}  // namespace kuramoto
