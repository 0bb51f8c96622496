#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string_view>

#include "kuramoto/domain.hpp"

namespace kuramoto {

enum class Verdict { subcritical, supercritical, indeterminate };

std::string_view verdict_name(Verdict v) noexcept;

struct ThresholdRoots {
  std::optional<double> d_minus;  // present when 1 >= 4Km
  std::optional<double> d_plus;
  double d_star_minus = 0.0;
  double d_star_plus = 0.0;
};

// d_pm = (-1 pm sqrt(1 - 4Km)) / 2m and d*_pm = (-1 pm sqrt(1 + 4Km)) / 2m.
ThresholdRoots threshold_roots(const Params& params);

struct ThresholdVerdict {
  ThresholdRoots roots;
  Verdict verdict = Verdict::indeterminate;
  double min_du0 = 0.0;
  std::size_t argmin = 0;  // index into the slope array
  double margin = 0.0;     // uncertainty of min_du0 used for the decision
  std::optional<double> blowup_time_bound;
};

// Classify from the initial slope at every grid point. A verdict is only
// issued when min_du0 clears the threshold by more than margin; equality with
// d_minus counts as subcritical.
ThresholdVerdict classify(std::span<const double> du0, const Params& params, double margin = 0.0);

// Slopes from the initial data (exact for symbolic u0) with the finite-difference
// margin 2 dtheta max|u0''| applied to tabulated velocities.
ThresholdVerdict classify(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega,
                          const Params& params);

// Solution of q' = -(q - d_minus)(q - d_plus), q(0) = d0.
double riccati_comparison(double d0, double d_minus, double d_plus, double t);

// 1 / (1/(d0 - d*_-) + t) + d*_-, valid before the pole 1/(d*_- - d0).
double supercritical_blowup_envelope(double d0, double d_star_minus, double t);

struct DensityBounds {
  std::optional<double> lower;
  std::optional<double> upper;
};

// Subcritical: rho <= rho0 e^{-t d_minus}. Supercritical:
// rho >= rho0 e^{-d*_- t} / |1 - (d*_- - d0) t|.
DensityBounds density_bounds(double rho0, double d0, const ThresholdVerdict& verdict, double t);

}  // namespace kuramoto
