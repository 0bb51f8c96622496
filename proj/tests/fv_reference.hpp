#pragma once

// Straightforward re-derivation of the semi-discrete scheme, written
// independently of the library kernels: periodic minmod reconstruction,
// Kurganov-Tadmor fluxes and a cell-centre source.

#include <algorithm>
#include <cmath>
#include <utility>
#include <vector>

namespace oracle {

inline double ref_minmod(double a, double b) {
  if (a * b <= 0.0) return 0.0;
  return std::abs(a) < std::abs(b) ? a : b;
}

struct RefFlux {
  double rho;
  double u;
};

inline RefFlux ref_kt(double rl, double ul, double rr, double ur) {
  const double ap = std::max({ul, ur, 0.0});
  const double am = std::min({ul, ur, 0.0});
  const double fl[2] = {rl * ul, ul * ul / 2};
  const double fr[2] = {rr * ur, ur * ur / 2};
  if (ap - am < 1e-12) return {(fl[0] + fr[0]) / 2, (fl[1] + fr[1]) / 2};
  const double d = ap - am;
  return {(ap * fl[0] - am * fr[0]) / d + ap * am / d * (rr - rl),
          (ap * fl[1] - am * fr[1]) / d + ap * am / d * (ur - ul)};
}

// Tendency of one slice with moments (C, S) frozen.
inline std::pair<std::vector<double>, std::vector<double>> ref_tendency(const std::vector<double>& rho,
                                                                        const std::vector<double>& u,
                                                                        const std::vector<double>& theta, double h,
                                                                        double omega, double m, double K, double C,
                                                                        double S) {
  const std::size_t n = rho.size();
  auto at = [n](const std::vector<double>& q, long j) { return q[static_cast<std::size_t>((j % long(n) + long(n)) % long(n))]; };
  std::vector<double> rE(n), rW(n), uE(n), uW(n);
  for (long j = 0; j < long(n); ++j) {
    const double sr = ref_minmod((at(rho, j) - at(rho, j - 1)) / h, (at(rho, j + 1) - at(rho, j)) / h);
    const double su = ref_minmod((at(u, j) - at(u, j - 1)) / h, (at(u, j + 1) - at(u, j)) / h);
    rE[j] = rho[j] + sr * h / 2;
    rW[j] = rho[j] - sr * h / 2;
    uE[j] = u[j] + su * h / 2;
    uW[j] = u[j] - su * h / 2;
  }
  std::vector<RefFlux> F(n);  // interface j + 1/2
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t r = (j + 1) % n;
    F[j] = ref_kt(rE[j], uE[j], rW[r], uW[r]);
  }
  std::vector<double> drho(n), du(n);
  for (std::size_t j = 0; j < n; ++j) {
    const std::size_t l = (j + n - 1) % n;
    drho[j] = -(F[j].rho - F[l].rho) / h;
    const double force = K * (S * std::cos(theta[j]) - C * std::sin(theta[j]));
    du[j] = -(F[j].u - F[l].u) / h + (-u[j] + omega + force) / m;
  }
  return {drho, du};
}

}  // namespace oracle
