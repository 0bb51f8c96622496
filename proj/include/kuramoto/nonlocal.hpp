#pragma once

#include <cmath>
#include <span>

#include "kuramoto/domain.hpp"

namespace kuramoto {

// Below this r the phase phi is reported as 0.
inline constexpr double kIncoherentR = 1e-14;

// Mean field r e^{i phi} = C + i S of the phase distribution.
struct OrderParam {
  double r = 0.0;
  double phi = 0.0;
  double C = 0.0;
  double S = 0.0;

  static OrderParam from_moments(double C, double S) noexcept;
};

// C = dtheta * sum_k w_k sum_j cos(theta_j) rho_jk, S likewise. Summation runs
// over j within each slice, then over k in ascending order.
OrderParam order_parameter(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega);

// Per-slice moments combined in ascending k; used by solvers that compute the
// slice sums themselves.
OrderParam combine_slice_moments(std::span<const double> cos_sums, std::span<const double> sin_sums,
                                 const OmegaGrid& omega, double dtheta);

// K * r * sin(phi - theta), evaluated as K * (S cos(theta) - C sin(theta)).
inline double mean_field_force(const OrderParam& op, double theta, const Params& params) noexcept {
  return params.K * (op.S * std::cos(theta) - op.C * std::sin(theta));
}

// r * cos(phi - theta) = C cos(theta) + S sin(theta).
inline double mean_field_cos(const OrderParam& op, double theta) noexcept {
  return op.C * std::cos(theta) + op.S * std::sin(theta);
}

}  // namespace kuramoto
