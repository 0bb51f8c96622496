// NEON variants (two lanes). Mirrors the AVX2 file; fused multiply-add is
// avoided so lanes round like the scalar reference.

#include <arm_neon.h>

#include "kernels_impl.hpp"

namespace kuramoto::simd {

namespace {

// vmaxq_f64 propagates NaN and orders signed zeros, unlike the scalar
// "a > b ? a : b"; select explicitly instead.
inline float64x2_t max2(float64x2_t a, float64x2_t b) { return vbslq_f64(vcgtq_f64(a, b), a, b); }
inline float64x2_t min2(float64x2_t a, float64x2_t b) { return vbslq_f64(vcltq_f64(a, b), a, b); }

inline float64x2_t minmod2(float64x2_t a, float64x2_t b) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const uint64x2_t same_sign = vcgtq_f64(vmulq_f64(a, b), zero);
  const float64x2_t pick = vbslq_f64(vcltq_f64(vabsq_f64(a), vabsq_f64(b)), a, b);
  return vreinterpretq_f64_u64(vandq_u64(vreinterpretq_u64_f64(pick), same_sign));
}

void reconstruct_neon(const double* q, double inv_dx, double half_dx, double* east, double* west,
                      std::ptrdiff_t begin, std::ptrdiff_t end) {
  const float64x2_t vinv = vdupq_n_f64(inv_dx);
  const float64x2_t vhalf = vdupq_n_f64(half_dx);
  std::ptrdiff_t i = begin;
  for (; i + 2 <= end; i += 2) {
    const float64x2_t qm = vld1q_f64(q + i - 1);
    const float64x2_t q0 = vld1q_f64(q + i);
    const float64x2_t qp = vld1q_f64(q + i + 1);
    const float64x2_t back = vmulq_f64(vsubq_f64(q0, qm), vinv);
    const float64x2_t fwd = vmulq_f64(vsubq_f64(qp, q0), vinv);
    const float64x2_t half = vmulq_f64(minmod2(back, fwd), vhalf);
    vst1q_f64(east + i, vaddq_f64(q0, half));
    vst1q_f64(west + i, vsubq_f64(q0, half));
  }
  reconstruct_range(q, inv_dx, half_dx, east, west, i, end);
}

double flux_neon(const SliceScratch& sc, std::ptrdiff_t begin, std::ptrdiff_t end) {
  const float64x2_t zero = vdupq_n_f64(0.0);
  const float64x2_t half = vdupq_n_f64(0.5);
  const float64x2_t one = vdupq_n_f64(1.0);
  const float64x2_t eps = vdupq_n_f64(kSpeedEpsilon);
  float64x2_t vspeed = zero;
  std::ptrdiff_t j = begin;
  for (; j + 2 <= end; j += 2) {
    const float64x2_t rho_l = vld1q_f64(sc.rho_east + j);
    const float64x2_t u_l = vld1q_f64(sc.u_east + j);
    const float64x2_t rho_r = vld1q_f64(sc.rho_west + j + 1);
    const float64x2_t u_r = vld1q_f64(sc.u_west + j + 1);

    const float64x2_t ap = max2(max2(u_l, u_r), zero);
    const float64x2_t am = min2(min2(u_l, u_r), zero);
    const float64x2_t spread = vsubq_f64(ap, am);
    const float64x2_t fl_rho = vmulq_f64(rho_l, u_l);
    const float64x2_t fl_u = vmulq_f64(half, vmulq_f64(u_l, u_l));
    const float64x2_t fr_rho = vmulq_f64(rho_r, u_r);
    const float64x2_t fr_u = vmulq_f64(half, vmulq_f64(u_r, u_r));

    const uint64x2_t degenerate = vcltq_f64(spread, eps);
    const float64x2_t mean_rho = vmulq_f64(half, vaddq_f64(fl_rho, fr_rho));
    const float64x2_t mean_u = vmulq_f64(half, vaddq_f64(fl_u, fr_u));

    const float64x2_t inv = vdivq_f64(one, spread);
    const float64x2_t diss = vmulq_f64(vmulq_f64(ap, am), inv);
    const float64x2_t kt_rho = vaddq_f64(vmulq_f64(vsubq_f64(vmulq_f64(ap, fl_rho), vmulq_f64(am, fr_rho)), inv),
                                         vmulq_f64(diss, vsubq_f64(rho_r, rho_l)));
    const float64x2_t kt_u = vaddq_f64(vmulq_f64(vsubq_f64(vmulq_f64(ap, fl_u), vmulq_f64(am, fr_u)), inv),
                                       vmulq_f64(diss, vsubq_f64(u_r, u_l)));

    vst1q_f64(sc.flux_rho + j, vbslq_f64(degenerate, mean_rho, kt_rho));
    vst1q_f64(sc.flux_u + j, vbslq_f64(degenerate, mean_u, kt_u));
    vspeed = max2(vspeed, max2(ap, vnegq_f64(am)));
  }
  const double speed = vmax(vgetq_lane_f64(vspeed, 0), vgetq_lane_f64(vspeed, 1));
  return vmax(speed, flux_range(sc, j, end));
}

void tendency_cells_neon(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out,
                         std::ptrdiff_t begin, std::ptrdiff_t end) {
  const float64x2_t inv_dx = vdupq_n_f64(in.inv_dtheta);
  const float64x2_t K = vdupq_n_f64(in.K);
  const float64x2_t C = vdupq_n_f64(in.C);
  const float64x2_t S = vdupq_n_f64(in.S);
  const float64x2_t omega = vdupq_n_f64(in.omega);
  const float64x2_t inv_m = vdupq_n_f64(in.inv_m);
  std::ptrdiff_t j = begin;
  for (; j + 2 <= end; j += 2) {
    const float64x2_t dfr = vsubq_f64(vld1q_f64(sc.flux_rho + j), vld1q_f64(sc.flux_rho + j - 1));
    const float64x2_t dfu = vsubq_f64(vld1q_f64(sc.flux_u + j), vld1q_f64(sc.flux_u + j - 1));
    vst1q_f64(out.drho + j, vmulq_f64(vnegq_f64(dfr), inv_dx));
    const float64x2_t c = vld1q_f64(in.cos_theta + j);
    const float64x2_t s = vld1q_f64(in.sin_theta + j);
    const float64x2_t u = vld1q_f64(in.u + j);
    const float64x2_t force = vmulq_f64(K, vsubq_f64(vmulq_f64(S, c), vmulq_f64(C, s)));
    const float64x2_t source = vmulq_f64(inv_m, vaddq_f64(vsubq_f64(omega, u), force));
    vst1q_f64(out.du + j, vaddq_f64(vmulq_f64(vnegq_f64(dfu), inv_dx), source));
  }
  tendency_range(in, sc, out, j, end);
}

double tendency_neon(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out) {
  const auto n = static_cast<std::ptrdiff_t>(in.n);
  const double half_dx = 0.5 * in.dtheta;
  reconstruct_neon(in.rho, in.inv_dtheta, half_dx, sc.rho_east, sc.rho_west, -1, n + 1);
  reconstruct_neon(in.u, in.inv_dtheta, half_dx, sc.u_east, sc.u_west, -1, n + 1);
  const double speed = flux_neon(sc, -1, n);
  tendency_cells_neon(in, sc, out, 0, n);
  return speed;
}

void moments_neon(const double* rho, const double* cos_theta, const double* sin_theta, std::size_t n,
                  double& cos_sum, double& sin_sum) {
  float64x2_t vc = vdupq_n_f64(0.0);
  float64x2_t vs = vdupq_n_f64(0.0);
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t r = vld1q_f64(rho + j);
    vc = vaddq_f64(vc, vmulq_f64(vld1q_f64(cos_theta + j), r));
    vs = vaddq_f64(vs, vmulq_f64(vld1q_f64(sin_theta + j), r));
  }
  double c = vgetq_lane_f64(vc, 0) + vgetq_lane_f64(vc, 1);
  double s = vgetq_lane_f64(vs, 0) + vgetq_lane_f64(vs, 1);
  for (; j < n; ++j) {
    c += cos_theta[j] * rho[j];
    s += sin_theta[j] * rho[j];
  }
  cos_sum = c;
  sin_sum = s;
}

void axpy_neon(const double* q, const double* k, double dt, double* out, std::size_t n) {
  const float64x2_t vdt = vdupq_n_f64(dt);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(out + i, vaddq_f64(vld1q_f64(q + i), vmulq_f64(vdt, vld1q_f64(k + i))));
  axpy_scalar(q + i, k + i, dt, out + i, n - i);
}

void heun_neon(const double* q, const double* q1, const double* k1, double dt, double* out, std::size_t n) {
  const float64x2_t vdt = vdupq_n_f64(dt);
  const float64x2_t half = vdupq_n_f64(0.5);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t sum = vaddq_f64(vld1q_f64(q + i), vld1q_f64(q1 + i));
    vst1q_f64(out + i, vmulq_f64(half, vaddq_f64(sum, vmulq_f64(vdt, vld1q_f64(k1 + i)))));
  }
  heun_scalar(q + i, q1 + i, k1 + i, dt, out + i, n - i);
}

}  // namespace

const KernelTable& neon_kernels() noexcept {
  static const KernelTable table{Isa::neon, &tendency_neon, &moments_neon, &axpy_neon, &heun_neon};
  return table;
}

}  // namespace kuramoto::simd
