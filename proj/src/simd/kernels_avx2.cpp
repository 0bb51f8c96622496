// AVX2 variants of the finite-volume kernels. Built with -mavx2 and without
// FMA so each lane rounds exactly like the scalar reference.

#include <immintrin.h>

#include "kernels_impl.hpp"

namespace kuramoto::simd {

namespace {

inline __m256d abs_pd(__m256d x) { return _mm256_andnot_pd(_mm256_set1_pd(-0.0), x); }
inline __m256d neg_pd(__m256d x) { return _mm256_xor_pd(_mm256_set1_pd(-0.0), x); }

inline __m256d minmod_pd(__m256d a, __m256d b) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d same_sign = _mm256_cmp_pd(_mm256_mul_pd(a, b), zero, _CMP_GT_OQ);
  const __m256d a_smaller = _mm256_cmp_pd(abs_pd(a), abs_pd(b), _CMP_LT_OQ);
  const __m256d pick = _mm256_blendv_pd(b, a, a_smaller);
  return _mm256_and_pd(pick, same_sign);
}

void reconstruct_avx2(const double* q, double inv_dx, double half_dx, double* east, double* west,
                      std::ptrdiff_t begin, std::ptrdiff_t end) {
  const __m256d vinv = _mm256_set1_pd(inv_dx);
  const __m256d vhalf = _mm256_set1_pd(half_dx);
  std::ptrdiff_t i = begin;
  for (; i + 4 <= end; i += 4) {
    const __m256d qm = _mm256_loadu_pd(q + i - 1);
    const __m256d q0 = _mm256_loadu_pd(q + i);
    const __m256d qp = _mm256_loadu_pd(q + i + 1);
    const __m256d back = _mm256_mul_pd(_mm256_sub_pd(q0, qm), vinv);
    const __m256d fwd = _mm256_mul_pd(_mm256_sub_pd(qp, q0), vinv);
    const __m256d half = _mm256_mul_pd(minmod_pd(back, fwd), vhalf);
    _mm256_storeu_pd(east + i, _mm256_add_pd(q0, half));
    _mm256_storeu_pd(west + i, _mm256_sub_pd(q0, half));
  }
  reconstruct_range(q, inv_dx, half_dx, east, west, i, end);
}

double flux_avx2(const SliceScratch& sc, std::ptrdiff_t begin, std::ptrdiff_t end) {
  const __m256d zero = _mm256_setzero_pd();
  const __m256d half = _mm256_set1_pd(0.5);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d eps = _mm256_set1_pd(kSpeedEpsilon);
  __m256d vspeed = zero;
  std::ptrdiff_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const __m256d rho_l = _mm256_loadu_pd(sc.rho_east + j);
    const __m256d u_l = _mm256_loadu_pd(sc.u_east + j);
    const __m256d rho_r = _mm256_loadu_pd(sc.rho_west + j + 1);
    const __m256d u_r = _mm256_loadu_pd(sc.u_west + j + 1);

    const __m256d ap = _mm256_max_pd(_mm256_max_pd(u_l, u_r), zero);
    const __m256d am = _mm256_min_pd(_mm256_min_pd(u_l, u_r), zero);
    const __m256d spread = _mm256_sub_pd(ap, am);
    const __m256d fl_rho = _mm256_mul_pd(rho_l, u_l);
    const __m256d fl_u = _mm256_mul_pd(half, _mm256_mul_pd(u_l, u_l));
    const __m256d fr_rho = _mm256_mul_pd(rho_r, u_r);
    const __m256d fr_u = _mm256_mul_pd(half, _mm256_mul_pd(u_r, u_r));

    const __m256d degenerate = _mm256_cmp_pd(spread, eps, _CMP_LT_OQ);
    const __m256d mean_rho = _mm256_mul_pd(half, _mm256_add_pd(fl_rho, fr_rho));
    const __m256d mean_u = _mm256_mul_pd(half, _mm256_add_pd(fl_u, fr_u));

    const __m256d inv = _mm256_div_pd(one, spread);
    const __m256d diss = _mm256_mul_pd(_mm256_mul_pd(ap, am), inv);
    const __m256d kt_rho = _mm256_add_pd(
        _mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(ap, fl_rho), _mm256_mul_pd(am, fr_rho)), inv),
        _mm256_mul_pd(diss, _mm256_sub_pd(rho_r, rho_l)));
    const __m256d kt_u = _mm256_add_pd(
        _mm256_mul_pd(_mm256_sub_pd(_mm256_mul_pd(ap, fl_u), _mm256_mul_pd(am, fr_u)), inv),
        _mm256_mul_pd(diss, _mm256_sub_pd(u_r, u_l)));

    _mm256_storeu_pd(sc.flux_rho + j, _mm256_blendv_pd(kt_rho, mean_rho, degenerate));
    _mm256_storeu_pd(sc.flux_u + j, _mm256_blendv_pd(kt_u, mean_u, degenerate));
    vspeed = _mm256_max_pd(vspeed, _mm256_max_pd(ap, neg_pd(am)));
  }
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, vspeed);
  double speed = vmax(vmax(lanes[0], lanes[1]), vmax(lanes[2], lanes[3]));
  return vmax(speed, flux_range(sc, j, end));
}

void tendency_cells_avx2(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out,
                         std::ptrdiff_t begin, std::ptrdiff_t end) {
  const __m256d inv_dx = _mm256_set1_pd(in.inv_dtheta);
  const __m256d K = _mm256_set1_pd(in.K);
  const __m256d C = _mm256_set1_pd(in.C);
  const __m256d S = _mm256_set1_pd(in.S);
  const __m256d omega = _mm256_set1_pd(in.omega);
  const __m256d inv_m = _mm256_set1_pd(in.inv_m);
  std::ptrdiff_t j = begin;
  for (; j + 4 <= end; j += 4) {
    const __m256d fr1 = _mm256_loadu_pd(sc.flux_rho + j);
    const __m256d fr0 = _mm256_loadu_pd(sc.flux_rho + j - 1);
    const __m256d fu1 = _mm256_loadu_pd(sc.flux_u + j);
    const __m256d fu0 = _mm256_loadu_pd(sc.flux_u + j - 1);
    _mm256_storeu_pd(out.drho + j, _mm256_mul_pd(neg_pd(_mm256_sub_pd(fr1, fr0)), inv_dx));

    const __m256d c = _mm256_loadu_pd(in.cos_theta + j);
    const __m256d s = _mm256_loadu_pd(in.sin_theta + j);
    const __m256d u = _mm256_loadu_pd(in.u + j);
    const __m256d force = _mm256_mul_pd(K, _mm256_sub_pd(_mm256_mul_pd(S, c), _mm256_mul_pd(C, s)));
    const __m256d source = _mm256_mul_pd(inv_m, _mm256_add_pd(_mm256_sub_pd(omega, u), force));
    const __m256d adv = _mm256_mul_pd(neg_pd(_mm256_sub_pd(fu1, fu0)), inv_dx);
    _mm256_storeu_pd(out.du + j, _mm256_add_pd(adv, source));
  }
  tendency_range(in, sc, out, j, end);
}

double tendency_avx2(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out) {
  const auto n = static_cast<std::ptrdiff_t>(in.n);
  const double half_dx = 0.5 * in.dtheta;
  reconstruct_avx2(in.rho, in.inv_dtheta, half_dx, sc.rho_east, sc.rho_west, -1, n + 1);
  reconstruct_avx2(in.u, in.inv_dtheta, half_dx, sc.u_east, sc.u_west, -1, n + 1);
  const double speed = flux_avx2(sc, -1, n);
  tendency_cells_avx2(in, sc, out, 0, n);
  return speed;
}

// Lane-parallel partial sums: deterministic for a given n, but not the
// ascending order of the scalar reference.
void moments_avx2(const double* rho, const double* cos_theta, const double* sin_theta, std::size_t n,
                  double& cos_sum, double& sin_sum) {
  __m256d vc = _mm256_setzero_pd();
  __m256d vs = _mm256_setzero_pd();
  std::size_t j = 0;
  for (; j + 4 <= n; j += 4) {
    const __m256d r = _mm256_loadu_pd(rho + j);
    vc = _mm256_add_pd(vc, _mm256_mul_pd(_mm256_loadu_pd(cos_theta + j), r));
    vs = _mm256_add_pd(vs, _mm256_mul_pd(_mm256_loadu_pd(sin_theta + j), r));
  }
  alignas(32) double lc[4];
  alignas(32) double ls[4];
  _mm256_store_pd(lc, vc);
  _mm256_store_pd(ls, vs);
  double c = (lc[0] + lc[1]) + (lc[2] + lc[3]);
  double s = (ls[0] + ls[1]) + (ls[2] + ls[3]);
  for (; j < n; ++j) {
    c += cos_theta[j] * rho[j];
    s += sin_theta[j] * rho[j];
  }
  cos_sum = c;
  sin_sum = s;
}

void axpy_avx2(const double* q, const double* k, double dt, double* out, std::size_t n) {
  const __m256d vdt = _mm256_set1_pd(dt);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(q + i), _mm256_mul_pd(vdt, _mm256_loadu_pd(k + i))));
  axpy_scalar(q + i, k + i, dt, out + i, n - i);
}

void heun_avx2(const double* q, const double* q1, const double* k1, double dt, double* out, std::size_t n) {
  const __m256d vdt = _mm256_set1_pd(dt);
  const __m256d half = _mm256_set1_pd(0.5);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d sum = _mm256_add_pd(_mm256_loadu_pd(q + i), _mm256_loadu_pd(q1 + i));
    const __m256d inc = _mm256_mul_pd(vdt, _mm256_loadu_pd(k1 + i));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(half, _mm256_add_pd(sum, inc)));
  }
  heun_scalar(q + i, q1 + i, k1 + i, dt, out + i, n - i);
}

}  // namespace

const KernelTable& avx2_kernels() noexcept {
  static const KernelTable table{Isa::avx2, &tendency_avx2, &moments_avx2, &axpy_avx2, &heun_avx2};
  return table;
}

}  // namespace kuramoto::simd
