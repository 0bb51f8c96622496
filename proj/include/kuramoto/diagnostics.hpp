#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "kuramoto/domain.hpp"
#include "kuramoto/fv_solver.hpp"
#include "kuramoto/lagrangian.hpp"
#include "kuramoto/nonlocal.hpp"

namespace kuramoto {

struct TimeSeriesRecord {
  double t = 0.0;
  double r = 0.0;
  double phi = 0.0;
  double Ek = 0.0;
  double Ep = 0.0;
  double vc = 0.0;
  double etac = 0.0;
  double d_eta = 0.0;
  double d_v = 0.0;
  double L = 0.0;
  double mass_err = 0.0;
  double min_du = 0.0;
  double max_rho = 0.0;
  double Ek_integral = 0.0;

  static constexpr std::size_t kColumns = 14;
  static const std::array<std::string, kColumns>& columns();
  std::array<double, kColumns> values() const;
};

struct Energies {
  double Ek = 0.0;
  double Ep = 0.0;
};

// Ek = 1/2 sum w (v - v_c)^2 and Ep = (K / 2m)(1 - r^2).
Energies energies(const Ensemble& ens, const OrderParam& op, const Params& params);
Energies energies(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega, const OrderParam& op,
                  const Params& params);

// (K / 2m) sum_i sum_j w_i w_j (1 - cos(eta_i - eta_j)), the O(N^2) form.
double potential_energy_direct(const Ensemble& ens, const Params& params);

double mean_velocity(const Ensemble& ens);
double mean_phase(const Ensemble& ens);
double mean_velocity(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega);

// L = 1/2 sum w (v + K r sin(eta - phi))^2.
double lyapunov_L(const Ensemble& ens, const OrderParam& op, const Params& params);

struct Diameters {
  double d_eta = 0.0;
  double d_v = 0.0;
};

// Over samples of positive weight; eta is unwrapped, so plain max - min.
Diameters diameters(const Ensemble& ens);
// Over cells with rho > support_floor in any slice. The phase diameter is the
// shortest arc covering the support's cell centres.
Diameters diameters(const FieldState& state, const ThetaGrid& grid, double support_floor);

// Centre of mass of an Eulerian state, measured along the shortest covering
// arc of its support so that a cluster straddling the seam is not split.
double mean_phase(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega, double support_floor);

// max over slices of |dtheta sum rho - 1|.
double mass_error(const FieldState& state, const ThetaGrid& grid);

enum class DampingRegime { overdamped, underdamped };

struct EnvelopeParams {
  double C0 = 0.0;
  double D0 = 0.0;
  double nu1 = 0.0;
  double nu2 = 0.0;
  double C1 = 0.0;
  double C2 = 0.0;
  DampingRegime regime = DampingRegime::overdamped;
};

// Requires 0 < C0 < pi; otherwise NotApplicable.
EnvelopeParams make_envelope(double d_eta0, double d_v0, const Params& params);

// Upper bounds on the phase and velocity diameters of an identical ensemble.
double phase_envelope(const EnvelopeParams& env, double d_eta0, double d_v0, const Params& params, double t);
double velocity_envelope(const EnvelopeParams& env, double d_eta0, double d_v0, const Params& params, double t);

// Bound for nonnegative x with a x'' + b x' + c x <= 0, x(0) = x0, x'(0) = x1.
double gronwall_bound(double a, double b, double c, double x0, double x1, double t);

struct RInfinity {
  double value = 0.0;
  double radicand = 0.0;
  bool consistent = true;  // false when the radicand is below -1e-10
};

// sqrt(r0^2 - (2m/K) Ek(0) + (4/K) int Ek) clamped at zero.
RInfinity r_infinity_prediction(double r0, double Ek0, double Ek_integral, const Params& params);

struct DiracDistance {
  double measured = 0.0;
  double bound = 0.0;
};

// measured = sum w |eta - eta_inf| with eta_inf = eta_c(0) + m v_c(0);
// bound = d_eta(t) + m |v_c(0)| e^{-t/m}.
DiracDistance dirac_distance_bound(const Ensemble& ens, double etac0, double vc0, const Params& params);

// Fires on density growth, steep negative gradient or non-finite values, and
// latches the first firing time.
class BlowupMonitor {
 public:
  BlowupMonitor(double max_rho0, const SchemeConfig& config);

  // Returns true once fired.
  bool update(double t, double max_rho, double min_du, bool nonfinite);
  bool update(const FieldState& state, const ThetaGrid& grid);
  bool update(const Ensemble& ens);

  bool fired() const noexcept { return fired_.has_value(); }
  std::optional<double> time() const noexcept { return fired_; }
  const std::string& reason() const noexcept { return reason_; }

 private:
  double max_rho0_;
  double rho_factor_;
  double grad_;
  std::optional<double> fired_;
  std::string reason_;
};

// Trapezoid accumulation of int_0^t Ek sampled at the recording times.
class TrapezoidIntegral {
 public:
  double add(double t, double value);
  double value() const noexcept { return sum_; }

 private:
  bool started_ = false;
  double t_ = 0.0;
  double f_ = 0.0;
  double sum_ = 0.0;
};

// Extreme values over Eulerian cells.
double max_density(const FieldState& state);
double min_slope(const FieldState& state, const ThetaGrid& grid);
double min_slope(const Ensemble& ens);

// Assemble a record for an oracle ensemble or an Eulerian state.
TimeSeriesRecord make_record(const Ensemble& ens, const OrderParam& op, const Params& params);
TimeSeriesRecord make_record(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega,
                             const OrderParam& op, const Params& params, double support_floor);

}  // namespace kuramoto
