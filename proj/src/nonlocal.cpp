#include "kuramoto/nonlocal.hpp"

#include <cmath>

namespace kuramoto {

OrderParam OrderParam::from_moments(double C, double S) noexcept {
  OrderParam op;
  op.C = C;
  op.S = S;
  op.r = std::hypot(C, S);
  // phi is unobservable when r vanishes (up to rounding of the quadrature);
  // pin it for deterministic output. The force uses C and S directly.
  op.phi = op.r > kIncoherentR ? std::atan2(S, C) : 0.0;
  return op;
}

OrderParam order_parameter(const FieldState& state, const ThetaGrid& grid, const OmegaGrid& omega) {
  const auto cosv = grid.cos_centers();
  const auto sinv = grid.sin_centers();
  double C = 0.0;
  double S = 0.0;
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    double c = 0.0;
    double s = 0.0;
    for (std::size_t j = 0; j < rho.size(); ++j) {
      c += cosv[j] * rho[j];
      s += sinv[j] * rho[j];
    }
    C += omega.weights[k] * c;
    S += omega.weights[k] * s;
  }
  return OrderParam::from_moments(C * grid.spacing(), S * grid.spacing());
}

OrderParam combine_slice_moments(std::span<const double> cos_sums, std::span<const double> sin_sums,
                                 const OmegaGrid& omega, double dtheta) {
  double C = 0.0;
  double S = 0.0;
  for (std::size_t k = 0; k < cos_sums.size(); ++k) {
    C += omega.weights[k] * cos_sums[k];
    S += omega.weights[k] * sin_sums[k];
  }
  return OrderParam::from_moments(C * dtheta, S * dtheta);
}

}  // namespace kuramoto
