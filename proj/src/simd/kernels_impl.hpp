#pragma once

// Scalar building blocks of the finite-volume tendency. The reference kernel
// is made entirely of these; the vector kernels use them for their tails, so
// every ISA performs the same operations in the same order.

#include <cstddef>

#include "kuramoto/simd/kernels.hpp"

namespace kuramoto::simd {

// East/west interface values of cells [begin, end).
inline void reconstruct_range(const double* q, double inv_dx, double half_dx, double* east, double* west,
                              std::ptrdiff_t begin, std::ptrdiff_t end) {
  for (std::ptrdiff_t i = begin; i < end; ++i) {
    const double back = (q[i] - q[i - 1]) * inv_dx;
    const double fwd = (q[i + 1] - q[i]) * inv_dx;
    const double half = minmod(back, fwd) * half_dx;
    east[i] = q[i] + half;
    west[i] = q[i] - half;
  }
}

struct KtFlux {
  double rho;
  double u;
  double speed;
};

inline KtFlux kt_flux_point(double rho_l, double u_l, double rho_r, double u_r) {
  const double ap = vmax(vmax(u_l, u_r), 0.0);
  const double am = vmin(vmin(u_l, u_r), 0.0);
  const double spread = ap - am;
  const double fl_rho = rho_l * u_l;
  const double fl_u = 0.5 * (u_l * u_l);
  const double fr_rho = rho_r * u_r;
  const double fr_u = 0.5 * (u_r * u_r);
  KtFlux f;
  f.speed = vmax(ap, -am);
  if (spread < kSpeedEpsilon) {
    f.rho = 0.5 * (fl_rho + fr_rho);
    f.u = 0.5 * (fl_u + fr_u);
    return f;
  }
  const double inv = 1.0 / spread;
  const double diss = (ap * am) * inv;
  f.rho = (ap * fl_rho - am * fr_rho) * inv + diss * (rho_r - rho_l);
  f.u = (ap * fl_u - am * fr_u) * inv + diss * (u_r - u_l);
  return f;
}

// Fluxes at interfaces j + 1/2 for j in [begin, end); returns the max speed.
inline double flux_range(const SliceScratch& sc, std::ptrdiff_t begin, std::ptrdiff_t end) {
  double speed = 0.0;
  for (std::ptrdiff_t j = begin; j < end; ++j) {
    const KtFlux f = kt_flux_point(sc.rho_east[j], sc.u_east[j], sc.rho_west[j + 1], sc.u_west[j + 1]);
    sc.flux_rho[j] = f.rho;
    sc.flux_u[j] = f.u;
    speed = vmax(speed, f.speed);
  }
  return speed;
}

inline void tendency_range(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out,
                           std::ptrdiff_t begin, std::ptrdiff_t end) {
  for (std::ptrdiff_t j = begin; j < end; ++j) {
    out.drho[j] = -(sc.flux_rho[j] - sc.flux_rho[j - 1]) * in.inv_dtheta;
    const double force = in.K * (in.S * in.cos_theta[j] - in.C * in.sin_theta[j]);
    const double source = in.inv_m * ((in.omega - in.u[j]) + force);
    out.du[j] = -(sc.flux_u[j] - sc.flux_u[j - 1]) * in.inv_dtheta + source;
  }
}

double tendency_scalar(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out);
void moments_scalar(const double* rho, const double* cos_theta, const double* sin_theta, std::size_t n,
                    double& cos_sum, double& sin_sum);
void axpy_scalar(const double* q, const double* k, double dt, double* out, std::size_t n);
void heun_scalar(const double* q, const double* q1, const double* k1, double dt, double* out, std::size_t n);

#if defined(KURAMOTO_HAVE_AVX2)
const KernelTable& avx2_kernels() noexcept;
#endif
#if defined(KURAMOTO_HAVE_NEON)
const KernelTable& neon_kernels() noexcept;
#endif

}  // namespace kuramoto::simd
