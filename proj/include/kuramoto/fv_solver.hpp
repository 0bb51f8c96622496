#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "kuramoto/domain.hpp"
#include "kuramoto/nonlocal.hpp"
#include "kuramoto/simd/kernels.hpp"

namespace kuramoto {

struct SchemeConfig {
  double cfl = 0.4;
  double max_dt = 1e-2;
  double blowup_rho_factor = 1e3;
  double blowup_grad = 1e6;
  // A step whose clipped negative mass exceeds this is rejected.
  double clip_limit = 1e-8;
  // Use the ascending-order scalar reduction for the order parameter.
  bool deterministic = false;

  void validate() const;
  bool operator==(const SchemeConfig&) const = default;
};

// Numerical fluxes of (rho, u) through one interface.
struct FluxPair {
  double F_rho = 0.0;
  double F_u = 0.0;
};

using simd::minmod;

// Minmod east/west interface values of a periodic array of cell values.
struct Reconstruction {
  std::vector<double> east;
  std::vector<double> west;
};
Reconstruction reconstruct(std::span<const double> Q, double dtheta);

// Kurganov-Tadmor flux between the left state (east face of cell j) and the
// right state (west face of cell j + 1).
FluxPair kt_flux(double rho_left, double u_left, double rho_right, double u_right);

struct Tendency {
  std::vector<double> drho;
  std::vector<double> du;
  double max_speed = 0.0;
};

// Semi-discrete right-hand side with the order parameter held fixed.
Tendency rhs(const FieldState& state, const OrderParam& op, const Params& params, const ThetaGrid& grid,
             const OmegaGrid& omega);

// min(max_dt, cfl * dtheta / max interface speed).
double cfl_dt(const FieldState& state, const ThetaGrid& grid, const SchemeConfig& config);

enum class StepStatus { ok, nonfinite, clip_exceeded };

struct StepInfo {
  StepStatus status = StepStatus::ok;
  double dt = 0.0;
  double clipped_mass = 0.0;  // g-weighted mass removed by clipping rho < 0
  double max_speed = 0.0;     // stage-one interface speed that set the CFL step
  OrderParam order;           // order parameter of the state the step started from
};

// Heun (RK2) integrator of the Eulerian system. Each stage is a parallel map
// over Omega slices followed by one reduction for (C, S).
class FvSolver {
 public:
  FvSolver(Params params, ThetaGrid grid, OmegaGrid omega, SchemeConfig config,
           const simd::KernelTable* kernels = nullptr);

  // One step of at most min(max_dt, CFL step, t_stop - state.t). The state is
  // left untouched unless the step succeeds.
  StepInfo step(FieldState& state, double t_stop);

  // One step of exactly dt.
  StepInfo step_fixed(FieldState& state, double dt);

  OrderParam order_parameter(const FieldState& state) const;

  const Params& params() const noexcept { return params_; }
  const ThetaGrid& grid() const noexcept { return grid_; }
  const OmegaGrid& omega() const noexcept { return omega_; }
  const SchemeConfig& config() const noexcept { return config_; }
  const simd::KernelTable& kernels() const noexcept { return *kernels_; }

  // Stage tendency of every slice into drho/du; returns the largest speed.
  double tendency(const std::vector<double>& rho, const std::vector<double>& u, const OrderParam& op,
                  std::vector<double>& drho, std::vector<double>& du) const;

 private:
  StepInfo advance(FieldState& state, double dt_cap, bool fixed);
  OrderParam moments_of(const std::vector<double>& rho) const;

  Params params_;
  ThetaGrid grid_;
  OmegaGrid omega_;
  SchemeConfig config_;
  const simd::KernelTable* kernels_;

  std::vector<double> k1_rho_, k1_u_, q1_rho_, q1_u_, k2_rho_, k2_u_, out_rho_, out_u_;
  std::vector<double> slice_speed_, slice_cos_, slice_sin_, slice_clip_;
  std::vector<unsigned char> slice_bad_;
};

// Free-function form of a single Heun step of size dt.
struct StepResult {
  FieldState state;
  StepInfo info;
};
StepResult step_rk2(const FieldState& state, double dt, const Params& params, const SchemeConfig& config,
                    const ThetaGrid& grid, const OmegaGrid& omega);

}  // namespace kuramoto
