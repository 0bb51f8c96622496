#pragma once

#include <cstddef>
#include <string_view>

namespace kuramoto::simd {

enum class Isa { scalar, avx2, neon };

std::string_view isa_name(Isa isa) noexcept;

// Inputs of the per-slice finite-volume tendency. rho and u point at the first
// interior cell of arrays padded with two ghost cells on each side
// (valid indices -2 .. n+1), already filled periodically.
struct SliceInput {
  const double* rho;
  const double* u;
  const double* cos_theta;  // n values at cell centres
  const double* sin_theta;
  std::size_t n;
  double dtheta;
  double inv_dtheta;
  double omega;   // natural frequency of the slice
  double inv_m;   // 1 / m
  double K;
  double C;       // order-parameter moments frozen for the stage
  double S;
};

// Scratch of at least n + 2 entries per array, indexed -1 .. n.
struct SliceScratch {
  double* rho_east;
  double* rho_west;
  double* u_east;
  double* u_west;
  double* flux_rho;  // interface j + 1/2 stored at index j, j = -1 .. n-1
  double* flux_u;
};

struct SliceOutput {
  double* drho;
  double* du;
};

// Minmod reconstruction, Kurganov-Tadmor interface fluxes and midpoint source.
// Returns the largest |a+| / |a-| over the slice's interfaces.
using TendencyFn = double (*)(const SliceInput&, const SliceScratch&, const SliceOutput&);

// Sums of cos(theta_j) rho_j and sin(theta_j) rho_j over one slice.
using MomentsFn = void (*)(const double* rho, const double* cos_theta, const double* sin_theta, std::size_t n,
                           double& cos_sum, double& sin_sum);

// out = q + dt * k
using AxpyFn = void (*)(const double* q, const double* k, double dt, double* out, std::size_t n);

// out = 0.5 * ((q + q1) + dt * k1)
using HeunFn = void (*)(const double* q, const double* q1, const double* k1, double dt, double* out,
                        std::size_t n);

struct KernelTable {
  Isa isa;
  TendencyFn tendency;
  MomentsFn moments;
  AxpyFn axpy;
  HeunFn heun;
};

// Reference implementation; always available.
const KernelTable& scalar_kernels() noexcept;

// Best table for this CPU, overridable with KURAMOTO_SIMD=scalar|avx2|neon.
const KernelTable& active_kernels();

// Table for a specific ISA, or nullptr when this build or CPU lacks it.
const KernelTable* kernels_for(Isa isa) noexcept;

bool cpu_supports(Isa isa) noexcept;

// Scalar primitives shared with the vector paths' tail loops.
inline double minmod(double a, double b) noexcept {
  if (!(a * b > 0.0)) return 0.0;
  return (a < 0.0 ? -a : a) < (b < 0.0 ? -b : b) ? a : b;
}

// Same semantics as _mm256_max_pd / _mm256_min_pd, so scalar and vector
// paths agree even on signed zeros.
inline double vmax(double a, double b) noexcept { return a > b ? a : b; }
inline double vmin(double a, double b) noexcept { return a < b ? a : b; }

// Below this spread of local speeds the KT flux falls back to the mean flux.
inline constexpr double kSpeedEpsilon = 1e-12;

}  // namespace kuramoto::simd
