#include "kuramoto/fv_solver.hpp"

#include <algorithm>
#include <cmath>
#include <utility>

#include "kuramoto/error.hpp"
#include "kuramoto/parallel.hpp"

namespace kuramoto {

void SchemeConfig::validate() const {
  if (!(cfl > 0.0 && cfl < 1.0)) throw ConfigError("cfl must lie in (0, 1)");
  if (!(max_dt > 0.0)) throw ConfigError("max_dt must be positive");
  if (!(blowup_rho_factor > 1.0)) throw ConfigError("blowup_rho_factor must exceed 1");
  if (!(blowup_grad > 0.0)) throw ConfigError("blowup_grad must be positive");
  if (!(clip_limit >= 0.0)) throw ConfigError("clip_limit must be nonnegative");
}

Reconstruction reconstruct(std::span<const double> Q, double dtheta) {
  const std::size_t n = Q.size();
  Reconstruction r{std::vector<double>(n), std::vector<double>(n)};
  const double inv = 1.0 / dtheta;
  const double half_dx = 0.5 * dtheta;
  for (std::size_t j = 0; j < n; ++j) {
    const double prev = Q[(j + n - 1) % n];
    const double next = Q[(j + 1) % n];
    const double half = minmod((Q[j] - prev) * inv, (next - Q[j]) * inv) * half_dx;
    r.east[j] = Q[j] + half;
    r.west[j] = Q[j] - half;
  }
  return r;
}

FluxPair kt_flux(double rho_left, double u_left, double rho_right, double u_right) {
  const double ap = std::max({u_left, u_right, 0.0});
  const double am = std::min({u_left, u_right, 0.0});
  const double fl_rho = rho_left * u_left;
  const double fl_u = 0.5 * (u_left * u_left);
  const double fr_rho = rho_right * u_right;
  const double fr_u = 0.5 * (u_right * u_right);
  if (ap - am < simd::kSpeedEpsilon) return {0.5 * (fl_rho + fr_rho), 0.5 * (fl_u + fr_u)};
  const double inv = 1.0 / (ap - am);
  const double diss = (ap * am) * inv;
  return {(ap * fl_rho - am * fr_rho) * inv + diss * (rho_right - rho_left),
          (ap * fl_u - am * fr_u) * inv + diss * (u_right - u_left)};
}

namespace {

constexpr std::size_t kGhost = 2;

// Per-thread padded copies of one slice plus the kernel scratch arrays.
struct SliceBuffers {
  std::vector<double> storage;
  double* rho = nullptr;
  double* u = nullptr;
  simd::SliceScratch scratch{};

  void prepare(std::size_t n) {
    const std::size_t padded = n + 2 * kGhost;
    const std::size_t work = n + 2;
    storage.resize(2 * padded + 6 * work);
    double* base = storage.data();
    rho = base + kGhost;
    u = base + padded + kGhost;
    double* w = base + 2 * padded + 1;
    scratch = {w, w + work, w + 2 * work, w + 3 * work, w + 4 * work, w + 5 * work};
  }
};

void fill_padded(const double* src, double* dst, std::size_t n) {
  std::copy(src, src + n, dst);
  dst[-2] = src[n - 2];
  dst[-1] = src[n - 1];
  dst[n] = src[0];
  dst[n + 1] = src[1];
}

std::size_t clip_negative(double* rho, std::size_t n, double& removed) {
  std::size_t count = 0;
  double sum = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    if (rho[j] < 0.0) {
      sum -= rho[j];
      rho[j] = 0.0;
      ++count;
    }
  }
  removed += sum;
  return count;
}

bool all_finite(const double* a, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (!std::isfinite(a[i])) return false;
  return true;
}

}  // namespace

FvSolver::FvSolver(Params params, ThetaGrid grid, OmegaGrid omega, SchemeConfig config,
                   const simd::KernelTable* kernels)
    : params_(params),
      grid_(std::move(grid)),
      omega_(std::move(omega)),
      config_(config),
      kernels_(kernels != nullptr ? kernels : &simd::active_kernels()) {
  params_.validate();
  config_.validate();
  const std::size_t n_omega = omega_.size();
  slice_speed_.resize(n_omega);
  slice_cos_.resize(n_omega);
  slice_sin_.resize(n_omega);
  slice_clip_.resize(n_omega);
  slice_bad_.resize(n_omega);
}

double FvSolver::tendency(const std::vector<double>& rho, const std::vector<double>& u, const OrderParam& op,
                          std::vector<double>& drho, std::vector<double>& du) const {
  const std::size_t n = grid_.size();
  const std::size_t n_omega = omega_.size();
  drho.resize(n * n_omega);
  du.resize(n * n_omega);
  std::vector<double> speeds(n_omega);
  const double dtheta = grid_.spacing();
  const double inv_dtheta = 1.0 / dtheta;
  const double inv_m = 1.0 / params_.m;
  parallel_for(n_omega, [&](std::size_t k) {
    thread_local SliceBuffers buf;
    buf.prepare(n);
    fill_padded(rho.data() + k * n, buf.rho, n);
    fill_padded(u.data() + k * n, buf.u, n);
    const simd::SliceInput in{buf.rho,
                              buf.u,
                              grid_.cos_centers().data(),
                              grid_.sin_centers().data(),
                              n,
                              dtheta,
                              inv_dtheta,
                              omega_.nodes[k],
                              inv_m,
                              params_.K,
                              op.C,
                              op.S};
    const simd::SliceOutput out{drho.data() + k * n, du.data() + k * n};
    speeds[k] = kernels_->tendency(in, buf.scratch, out);
  });
  double speed = 0.0;
  for (double s : speeds) {
    if (!std::isfinite(s)) return s;
    speed = std::max(speed, s);
  }
  return speed;
}

OrderParam FvSolver::moments_of(const std::vector<double>& rho) const {
  const std::size_t n = grid_.size();
  const simd::MomentsFn moments = config_.deterministic ? simd::scalar_kernels().moments : kernels_->moments;
  std::vector<double> c(omega_.size());
  std::vector<double> s(omega_.size());
  parallel_for(omega_.size(), [&](std::size_t k) {
    moments(rho.data() + k * n, grid_.cos_centers().data(), grid_.sin_centers().data(), n, c[k], s[k]);
  });
  return combine_slice_moments(c, s, omega_, grid_.spacing());
}

OrderParam FvSolver::order_parameter(const FieldState& state) const { return moments_of(state.rho); }

StepInfo FvSolver::step(FieldState& state, double t_stop) {
  const double remaining = t_stop - state.t;
  if (!(remaining > 0.0)) throw DomainError("step requested at or past the stop time");
  return advance(state, remaining, false);
}

StepInfo FvSolver::step_fixed(FieldState& state, double dt) {
  if (!(dt > 0.0)) throw DomainError("time step must be positive");
  return advance(state, dt, true);
}

StepInfo FvSolver::advance(FieldState& state, double dt_cap, bool fixed) {
  const std::size_t n = grid_.size();
  const std::size_t n_omega = omega_.size();
  if (state.n_theta != n || state.n_omega != n_omega) throw GridMismatch("state does not match the solver grids");
  const std::size_t total = n * n_omega;
  q1_rho_.resize(total);
  q1_u_.resize(total);
  out_rho_.resize(total);
  out_u_.resize(total);

  StepInfo info;
  info.order = moments_of(state.rho);
  const double speed = tendency(state.rho, state.u, info.order, k1_rho_, k1_u_);
  info.max_speed = speed;
  if (!std::isfinite(speed)) {
    info.status = StepStatus::nonfinite;
    return info;
  }
  double dt = dt_cap;
  if (!fixed) {
    const double cfl_step = config_.cfl * grid_.spacing() / std::max(speed, simd::kSpeedEpsilon);
    dt = std::min({config_.max_dt, cfl_step, dt_cap});
  }
  info.dt = dt;

  const simd::MomentsFn moments = config_.deterministic ? simd::scalar_kernels().moments : kernels_->moments;
  const double* cosv = grid_.cos_centers().data();
  const double* sinv = grid_.sin_centers().data();

  parallel_for(n_omega, [&](std::size_t k) {
    const std::size_t o = k * n;
    kernels_->axpy(state.rho.data() + o, k1_rho_.data() + o, dt, q1_rho_.data() + o, n);
    kernels_->axpy(state.u.data() + o, k1_u_.data() + o, dt, q1_u_.data() + o, n);
    slice_clip_[k] = 0.0;
    clip_negative(q1_rho_.data() + o, n, slice_clip_[k]);
    moments(q1_rho_.data() + o, cosv, sinv, n, slice_cos_[k], slice_sin_[k]);
  });
  const OrderParam op1 = combine_slice_moments(slice_cos_, slice_sin_, omega_, grid_.spacing());
  tendency(q1_rho_, q1_u_, op1, k2_rho_, k2_u_);

  parallel_for(n_omega, [&](std::size_t k) {
    const std::size_t o = k * n;
    kernels_->heun(state.rho.data() + o, q1_rho_.data() + o, k2_rho_.data() + o, dt, out_rho_.data() + o, n);
    kernels_->heun(state.u.data() + o, q1_u_.data() + o, k2_u_.data() + o, dt, out_u_.data() + o, n);
    clip_negative(out_rho_.data() + o, n, slice_clip_[k]);
    slice_bad_[k] = !(all_finite(out_rho_.data() + o, n) && all_finite(out_u_.data() + o, n));
  });

  double clipped = 0.0;
  for (std::size_t k = 0; k < n_omega; ++k) {
    clipped += omega_.weights[k] * slice_clip_[k];
    if (slice_bad_[k]) info.status = StepStatus::nonfinite;
  }
  info.clipped_mass = clipped * grid_.spacing();
  if (info.status != StepStatus::ok) return info;
  if (!(info.clipped_mass <= config_.clip_limit)) {
    info.status = StepStatus::clip_exceeded;
    return info;
  }
  std::swap(state.rho, out_rho_);
  std::swap(state.u, out_u_);
  state.t += dt;
  return info;
}

Tendency rhs(const FieldState& state, const OrderParam& op, const Params& params, const ThetaGrid& grid,
             const OmegaGrid& omega) {
  const FvSolver solver(params, grid, omega, SchemeConfig{});
  Tendency t;
  t.max_speed = solver.tendency(state.rho, state.u, op, t.drho, t.du);
  return t;
}

double cfl_dt(const FieldState& state, const ThetaGrid& grid, const SchemeConfig& config) {
  const std::size_t n = grid.size();
  double speed = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const Reconstruction ru = reconstruct(state.u_slice(k), grid.spacing());
    for (std::size_t j = 0; j < n; ++j) {
      const double ul = ru.east[j];
      const double ur = ru.west[(j + 1) % n];
      speed = std::max({speed, std::max({ul, ur, 0.0}), -std::min({ul, ur, 0.0})});
    }
  }
  return std::min(config.max_dt, config.cfl * grid.spacing() / std::max(speed, simd::kSpeedEpsilon));
}

StepResult step_rk2(const FieldState& state, double dt, const Params& params, const SchemeConfig& config,
                    const ThetaGrid& grid, const OmegaGrid& omega) {
  FvSolver solver(params, grid, omega, config);
  StepResult result{state, {}};
  result.info = solver.step_fixed(result.state, dt);
  return result;
}

}  // namespace kuramoto
