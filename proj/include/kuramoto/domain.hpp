#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "kuramoto/expr.hpp"

namespace kuramoto {

// Inertia m > 0 and coupling K >= 0.
struct Params {
  double m = 1.0;
  double K = 0.0;

  void validate() const;
  bool operator==(const Params&) const = default;
};

// Uniform periodic grid on [-pi, pi); cell j is centred at -pi + (j + 1/2) dtheta.
class ThetaGrid {
 public:
  ThetaGrid() = default;
  explicit ThetaGrid(std::size_t n_theta);

  std::size_t size() const noexcept { return centers_.size(); }
  double spacing() const noexcept { return spacing_; }
  double center(std::size_t j) const { return centers_[j]; }
  std::span<const double> centers() const noexcept { return centers_; }
  std::span<const double> cos_centers() const noexcept { return cos_; }
  std::span<const double> sin_centers() const noexcept { return sin_; }

  // Periodic neighbour index for any signed offset.
  std::size_t wrap(std::ptrdiff_t j) const noexcept;
  // Cell containing an arbitrary (unwrapped) phase.
  std::size_t cell_of(double theta) const noexcept;

 private:
  std::vector<double> centers_;
  std::vector<double> cos_;
  std::vector<double> sin_;
  double spacing_ = 0.0;
};

ThetaGrid make_theta_grid(std::size_t n_theta);

// Wrap a phase onto [-pi, pi).
double wrap_phase(double theta) noexcept;

enum class FrequencyKind { dirac, normal };

struct FrequencySpec {
  FrequencyKind kind = FrequencyKind::dirac;
  double center = 0.0;  // Omega_0 for dirac, mean for normal
  double scale = 1.0;   // standard deviation for normal

  static FrequencySpec parse(const std::string& text);
  std::string to_string() const;
};

// Discrete natural-frequency measure: nodes with probability weights.
struct OmegaGrid {
  std::vector<double> nodes;
  std::vector<double> weights;
  FrequencyKind kind = FrequencyKind::dirac;

  std::size_t size() const noexcept { return nodes.size(); }
  double second_moment() const;
};

// Trapezoid weights of the chosen density on center +- L*scale, renormalised
// to sum to one. For the Dirac kind n_omega and L are ignored.
OmegaGrid discretize_frequency(const FrequencySpec& spec, std::size_t n_omega, double L);

// Eulerian fields, stored slice-major: index k * n_theta + j holds
// (theta_j, Omega_k). rho is a density per unit theta within each slice.
struct FieldState {
  std::size_t n_theta = 0;
  std::size_t n_omega = 0;
  std::vector<double> rho;
  std::vector<double> u;
  double t = 0.0;

  FieldState() = default;
  FieldState(std::size_t n_theta_, std::size_t n_omega_);

  std::span<double> rho_slice(std::size_t k) { return {rho.data() + k * n_theta, n_theta}; }
  std::span<double> u_slice(std::size_t k) { return {u.data() + k * n_theta, n_theta}; }
  std::span<const double> rho_slice(std::size_t k) const { return {rho.data() + k * n_theta, n_theta}; }
  std::span<const double> u_slice(std::size_t k) const { return {u.data() + k * n_theta, n_theta}; }

  double slice_mass(std::size_t k, double dtheta) const;
};

// Row of an initial-condition table (CSV columns theta, omega, rho, u).
struct InitRow {
  double theta;
  double omega;
  double rho;
  double u;
};

std::vector<InitRow> read_init_table(const std::string& path);

// Symbolic initial density.
struct DensityProfile {
  enum class Kind { gaussian, uniform, dirac, expression, table };
  Kind kind = Kind::uniform;
  double mu = 0.0;
  double sigma = 1.0;
  // Compact support [lo, hi]; defaults to the whole torus.
  double lo = -3.141592653589793;
  double hi = 3.141592653589793;
  std::optional<Expression> expr;
  std::string text;

  static DensityProfile parse(const std::string& text);
  // Unnormalised value; zero outside [lo, hi].
  double operator()(double theta, double omega) const;
  bool compact() const noexcept;
};

struct VelocityProfile {
  enum class Kind { expression, table };
  Kind kind = Kind::expression;
  std::optional<Expression> expr;
  std::string text;

  static VelocityProfile parse(const std::string& text);
  Dual eval(double theta, double omega) const;
  bool symbolic() const noexcept { return kind == Kind::expression; }
};

struct InitSpec {
  DensityProfile rho0;
  VelocityProfile u0;
  std::vector<InitRow> table;  // filled when either profile is tabulated

  // Profile strings as accepted by DensityProfile/VelocityProfile::parse; the
  // literal "table" selects the corresponding column of the table file.
  static InitSpec parse(const std::string& rho0, const std::string& u0, const std::string& table_path = "");
};

// Cell-centre collocation with per-slice mass renormalised to exactly one.
FieldState init_state(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega);

// Rescale every slice to unit mass. Zero-mass slices raise InvalidInitialData.
void normalize_masses(FieldState& state, const ThetaGrid& grid);

// Slope of u0 at cell centres: exact for symbolic profiles, centred
// differences for tables.
std::vector<double> initial_velocity_slope(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega,
                                           const FieldState& initial);

// Centred-difference slope of every slice of u.
std::vector<double> centered_slope(const FieldState& state, const ThetaGrid& grid);

}  // namespace kuramoto
