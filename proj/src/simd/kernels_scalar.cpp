#include "kernels_impl.hpp"

namespace kuramoto::simd {

double tendency_scalar(const SliceInput& in, const SliceScratch& sc, const SliceOutput& out) {
  const auto n = static_cast<std::ptrdiff_t>(in.n);
  const double half_dx = 0.5 * in.dtheta;
  reconstruct_range(in.rho, in.inv_dtheta, half_dx, sc.rho_east, sc.rho_west, -1, n + 1);
  reconstruct_range(in.u, in.inv_dtheta, half_dx, sc.u_east, sc.u_west, -1, n + 1);
  const double speed = flux_range(sc, -1, n);
  tendency_range(in, sc, out, 0, n);
  return speed;
}

void moments_scalar(const double* rho, const double* cos_theta, const double* sin_theta, std::size_t n,
                    double& cos_sum, double& sin_sum) {
  double c = 0.0;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    c += cos_theta[j] * rho[j];
    s += sin_theta[j] * rho[j];
  }
  cos_sum = c;
  sin_sum = s;
}

void axpy_scalar(const double* q, const double* k, double dt, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = q[i] + dt * k[i];
}

void heun_scalar(const double* q, const double* q1, const double* k1, double dt, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * ((q[i] + q1[i]) + dt * k1[i]);
}

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{Isa::scalar, &tendency_scalar, &moments_scalar, &axpy_scalar, &heun_scalar};
  return table;
}

}  // namespace kuramoto::simd
