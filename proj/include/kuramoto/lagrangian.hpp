#pragma once

#include <cstddef>
#include <functional>
#include <iosfwd>
#include <vector>

#include "kuramoto/domain.hpp"
#include "kuramoto/nonlocal.hpp"

namespace kuramoto {

// One characteristic: phase eta, velocity v, velocity gradient d and
// log-density carried from theta0 at natural frequency Omega.
struct CharSample {
  double theta0 = 0.0;
  double Omega = 0.0;
  double weight = 0.0;
  double eta = 0.0;
  double v = 0.0;
  double d = 0.0;
  double log_rho = 0.0;
};

// Structure-of-arrays ensemble. Samples are grouped by Omega slice and sorted
// by theta0 within a slice; eta is kept unwrapped.
struct Ensemble {
  std::vector<double> theta0;
  std::vector<double> omega;
  std::vector<double> weight;
  std::vector<double> eta;
  std::vector<double> v;
  std::vector<double> d;
  std::vector<double> log_rho;
  std::vector<double> v0;
  std::vector<double> d0;
  std::vector<std::size_t> slice_begin;  // n_slices + 1 offsets
  // True when the theta0 nodes tile the whole circle, so the last sample of a
  // slice neighbours the first one.
  bool periodic = true;
  double t = 0.0;

  bool blown_up = false;
  double blowup_time = 0.0;
  std::size_t blowup_sample = 0;

  std::size_t size() const noexcept { return eta.size(); }
  std::size_t slices() const noexcept { return slice_begin.empty() ? 0 : slice_begin.size() - 1; }
  CharSample sample(std::size_t i) const;
};

// n_samples nodes per Omega slice: cell-centred on the whole torus, or
// including both endpoints when the density has compact support. Weights are
// rho0 * spacing * w_k with each slice renormalised to w_k.
Ensemble sample_initial(const InitSpec& spec, const OmegaGrid& omega, std::size_t n_samples);

// Samples from a discrete state by periodic linear interpolation of rho and
// u; d is the interpolated centred slope.
Ensemble sample_initial(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega,
                        std::size_t n_samples);

// r e^{i phi} = sum_i w_i e^{i eta_i}, summed in sample order.
OrderParam ensemble_order(const Ensemble& ens);

struct OracleConfig {
  double dt = 1e-3;
  double eps_blow = 1e-6;  // blow-up once d < -1 / eps_blow
};

// Called after every accepted step (and once at the start) with the ensemble
// and the order parameter at its current time. Returning false stops early.
using OracleObserver = std::function<bool(const Ensemble&, const OrderParam&)>;

// Classical RK4 on eta' = v, m v' = -v + Omega + K r sin(phi - eta),
// d' = -d^2 - d/m - (K/m) r cos(phi - eta), (log rho)' = -d, with (r, phi)
// refreshed at every stage. Stops at T or at the first blow-up.
void evolve(Ensemble& ens, const Params& params, double T, const OracleConfig& config,
            const OracleObserver& observer = {});

// Conservative histogram of each slice: a sample's weight is spread over the
// interval between the midpoints to its neighbours, wrapped onto the grid.
// Returns per-slice densities in FieldState layout.
std::vector<double> pushforward_density(const Ensemble& ens, const ThetaGrid& grid);

// Density as above plus the mass-weighted mean velocity of each cell (zero in
// empty cells).
struct PushforwardFields {
  std::vector<double> rho;
  std::vector<double> u;
};
PushforwardFields pushforward_fields(const Ensemble& ens, const ThetaGrid& grid);

void write_trajectory_header(std::ostream& out);
void write_trajectory_rows(std::ostream& out, const Ensemble& ens);

}  // namespace kuramoto
