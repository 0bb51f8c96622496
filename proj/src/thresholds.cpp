#include "kuramoto/thresholds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "kuramoto/error.hpp"

namespace kuramoto {

std::string_view verdict_name(Verdict v) noexcept {
  switch (v) {
    case Verdict::subcritical: return "Subcritical";
    case Verdict::supercritical: return "Supercritical";
    case Verdict::indeterminate: return "Indeterminate";
  }
  return "Indeterminate";
}

ThresholdRoots threshold_roots(const Params& params) {
  params.validate();
  const double m = params.m;
  const double km4 = 4.0 * params.K * m;
  ThresholdRoots r;
  if (km4 <= 1.0) {
    const double s = std::sqrt(1.0 - km4);
    r.d_minus = (-1.0 - s) / (2.0 * m);
    r.d_plus = (-1.0 + s) / (2.0 * m);
  }
  const double s = std::sqrt(1.0 + km4);
  r.d_star_minus = (-1.0 - s) / (2.0 * m);
  r.d_star_plus = (-1.0 + s) / (2.0 * m);
  return r;
}

ThresholdVerdict classify(std::span<const double> du0, const Params& params, double margin) {
  if (du0.empty()) throw DomainError("classify needs at least one slope value");
  ThresholdVerdict v;
  v.roots = threshold_roots(params);
  v.margin = margin;
  const auto it = std::min_element(du0.begin(), du0.end());
  v.argmin = static_cast<std::size_t>(it - du0.begin());
  v.min_du0 = *it;
  if (v.min_du0 < v.roots.d_star_minus - margin) {
    v.verdict = Verdict::supercritical;
    v.blowup_time_bound = 1.0 / (v.roots.d_star_minus - v.min_du0);
  } else if (v.roots.d_minus && v.min_du0 >= *v.roots.d_minus + margin) {
    v.verdict = Verdict::subcritical;
  }
  return v;
}

ThresholdVerdict classify(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega,
                          const Params& params) {
  const FieldState initial = init_state(spec, grid, omega);
  const std::vector<double> slope = initial_velocity_slope(spec, grid, omega, initial);
  double margin = 0.0;
  if (!spec.u0.symbolic()) {
    const std::size_t n = grid.size();
    const double inv = 1.0 / (grid.spacing() * grid.spacing());
    double curvature = 0.0;
    for (std::size_t k = 0; k < omega.size(); ++k) {
      const auto u = initial.u_slice(k);
      for (std::size_t j = 0; j < n; ++j) {
        const double upp = (u[grid.wrap(static_cast<std::ptrdiff_t>(j) + 1)] - 2.0 * u[j] +
                            u[grid.wrap(static_cast<std::ptrdiff_t>(j) - 1)]) * inv;
        curvature = std::max(curvature, std::abs(upp));
      }
    }
    margin = 2.0 * grid.spacing() * curvature;
  }
  return classify(slope, params, margin);
}

double riccati_comparison(double d0, double d_minus, double d_plus, double t) {
  if (d_minus > d_plus) throw DomainError("riccati_comparison needs d_minus <= d_plus");
  if (d0 < d_minus) throw DomainError("riccati_comparison needs d0 >= d_minus");
  if (d0 == d_minus || d0 == d_plus) return d0;
  const double lambda = d_plus - d_minus;
  if (lambda == 0.0) return d_plus + 1.0 / (1.0 / (d0 - d_plus) + t);
  // Written with e^{-lambda t} so large t stays finite.
  const double e = std::exp(-lambda * t);
  return (d_plus * (d0 - d_minus) + d_minus * (d_plus - d0) * e) / ((d0 - d_minus) + (d_plus - d0) * e);
}

double supercritical_blowup_envelope(double d0, double d_star_minus, double t) {
  if (!(d0 < d_star_minus)) throw DomainError("supercritical envelope needs d0 < d*_-");
  const double pole = 1.0 / (d_star_minus - d0);
  if (t >= pole) throw PastBlowup("time is at or past the envelope's blow-up time");
  return 1.0 / (1.0 / (d0 - d_star_minus) + t) + d_star_minus;
}

DensityBounds density_bounds(double rho0, double d0, const ThresholdVerdict& verdict, double t) {
  DensityBounds b;
  if (verdict.verdict == Verdict::subcritical && verdict.roots.d_minus) {
    b.upper = rho0 * std::exp(-t * *verdict.roots.d_minus);
  } else if (verdict.verdict == Verdict::supercritical && d0 < verdict.roots.d_star_minus) {
    const double ds = verdict.roots.d_star_minus;
    const double denom = 1.0 - (ds - d0) * t;
    // Past the pole the bound has already diverged.
    b.lower = denom > 0.0 ? rho0 * std::exp(-ds * t) / denom : std::numeric_limits<double>::infinity();
  }
  return b;
}

}  // namespace kuramoto
