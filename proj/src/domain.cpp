#include "kuramoto/domain.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>
#include <sstream>

#include "kuramoto/error.hpp"

namespace kuramoto {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return {};
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

// "name(a, b, c)" -> name and the argument list evaluated as constant
// expressions. Returns false when text is not a call of that shape.
bool split_call(const std::string& text, std::string& name, std::vector<double>& args) {
  const std::string s = trim(text);
  const auto open = s.find('(');
  if (open == std::string::npos || s.back() != ')') {
    name = s;
    args.clear();
    return false;
  }
  name = trim(s.substr(0, open));
  args.clear();
  const std::string inner = s.substr(open + 1, s.size() - open - 2);
  int depth = 0;
  std::string current;
  for (char c : inner) {
    if (c == '(') ++depth;
    if (c == ')') --depth;
    if (c == ',' && depth == 0) {
      args.push_back(Expression::parse(current)(0.0));
      current.clear();
    } else {
      current += c;
    }
  }
  if (!trim(current).empty()) args.push_back(Expression::parse(current)(0.0));
  return true;
}

double gaussian_pdf(double x, double mu, double sigma) {
  const double z = (x - mu) / sigma;
  return std::exp(-0.5 * z * z) / (sigma * std::sqrt(kTwoPi));
}

}  // namespace

void Params::validate() const {
  if (!(m > 0.0) || !std::isfinite(m)) throw ConfigError("m must be positive");
  if (!(K >= 0.0) || !std::isfinite(K)) throw ConfigError("K must be nonnegative");
}

ThetaGrid::ThetaGrid(std::size_t n_theta) {
  if (n_theta < 4) throw InvalidGrid("n_theta must be at least 4, got " + std::to_string(n_theta));
  spacing_ = kTwoPi / static_cast<double>(n_theta);
  centers_.resize(n_theta);
  cos_.resize(n_theta);
  sin_.resize(n_theta);
  for (std::size_t j = 0; j < n_theta; ++j) {
    centers_[j] = -kPi + (static_cast<double>(j) + 0.5) * spacing_;
    cos_[j] = std::cos(centers_[j]);
    sin_[j] = std::sin(centers_[j]);
  }
}

std::size_t ThetaGrid::wrap(std::ptrdiff_t j) const noexcept {
  const auto n = static_cast<std::ptrdiff_t>(centers_.size());
  std::ptrdiff_t r = j % n;
  if (r < 0) r += n;
  return static_cast<std::size_t>(r);
}

std::size_t ThetaGrid::cell_of(double theta) const noexcept {
  const double shifted = wrap_phase(theta) + kPi;
  auto j = static_cast<std::ptrdiff_t>(std::floor(shifted / spacing_));
  return wrap(j);
}

ThetaGrid make_theta_grid(std::size_t n_theta) { return ThetaGrid(n_theta); }

double wrap_phase(double theta) noexcept {
  double r = std::fmod(theta + kPi, kTwoPi);
  if (r < 0.0) r += kTwoPi;
  if (r >= kTwoPi) r -= kTwoPi;
  return r - kPi;
}

FrequencySpec FrequencySpec::parse(const std::string& text) {
  std::string name;
  std::vector<double> args;
  split_call(text, name, args);
  FrequencySpec spec;
  if (name == "dirac" || name == "identical") {
    spec.kind = FrequencyKind::dirac;
    spec.center = args.empty() ? 0.0 : args[0];
    if (args.size() > 1) throw ConfigError("dirac(...) takes one argument");
  } else if (name == "normal" || name == "gaussian") {
    spec.kind = FrequencyKind::normal;
    spec.center = args.size() > 0 ? args[0] : 0.0;
    spec.scale = args.size() > 1 ? args[1] : 1.0;
    if (args.size() > 2) throw ConfigError("normal(...) takes at most two arguments");
    if (!(spec.scale > 0.0)) throw ConfigError("normal(...) needs a positive standard deviation");
  } else {
    throw ConfigError("unknown frequency distribution '" + text + "' (expected dirac(...) or normal(...))");
  }
  return spec;
}

std::string FrequencySpec::to_string() const {
  std::ostringstream out;
  out.precision(17);
  if (kind == FrequencyKind::dirac) {
    out << "dirac(" << center << ")";
  } else {
    out << "normal(" << center << ", " << scale << ")";
  }
  return out.str();
}

double OmegaGrid::second_moment() const {
  double s = 0.0;
  for (std::size_t k = 0; k < nodes.size(); ++k) s += nodes[k] * nodes[k] * weights[k];
  return s;
}

OmegaGrid discretize_frequency(const FrequencySpec& spec, std::size_t n_omega, double L) {
  OmegaGrid grid;
  grid.kind = spec.kind;
  if (spec.kind == FrequencyKind::dirac) {
    grid.nodes = {spec.center};
    grid.weights = {1.0};
    return grid;
  }
  if (n_omega < 2) throw InvalidGrid("a density-valued frequency distribution needs n_omega >= 2");
  if (!(L > 0.0)) throw InvalidGrid("frequency truncation L must be positive");
  const double lo = spec.center - L * spec.scale;
  const double h = 2.0 * L * spec.scale / static_cast<double>(n_omega - 1);
  grid.nodes.resize(n_omega);
  grid.weights.resize(n_omega);
  double total = 0.0;
  for (std::size_t k = 0; k < n_omega; ++k) {
    grid.nodes[k] = lo + static_cast<double>(k) * h;
    const double end_factor = (k == 0 || k + 1 == n_omega) ? 0.5 : 1.0;
    grid.weights[k] = end_factor * h * gaussian_pdf(grid.nodes[k], spec.center, spec.scale);
    total += grid.weights[k];
  }
  if (!(total > 0.0) || !std::isfinite(total)) throw DegenerateDistribution("frequency weights sum to zero");
  for (double& w : grid.weights) w /= total;
  return grid;
}

FieldState::FieldState(std::size_t n_theta_, std::size_t n_omega_)
    : n_theta(n_theta_), n_omega(n_omega_), rho(n_theta_ * n_omega_, 0.0), u(n_theta_ * n_omega_, 0.0) {}

double FieldState::slice_mass(std::size_t k, double dtheta) const {
  double s = 0.0;
  for (double r : rho_slice(k)) s += r;
  return s * dtheta;
}

std::vector<InitRow> read_init_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInitialData("cannot open initial-condition table '" + path + "'");
  std::string line;
  if (!std::getline(in, line)) throw InvalidInitialData("initial-condition table '" + path + "' is empty");
  std::vector<std::string> header;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) header.push_back(trim(cell));
  }
  auto column = [&](const std::string& name) {
    const auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw InvalidInitialData("table '" + path + "' lacks column '" + name + "'");
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t c_theta = column("theta");
  const std::size_t c_omega = column("omega");
  const std::size_t c_rho = column("rho");
  const std::size_t c_u = column("u");
  std::vector<InitRow> rows;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    std::vector<double> values;
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) {
      try {
        values.push_back(std::stod(cell));
      } catch (const std::exception&) {
        throw InvalidInitialData("table '" + path + "' line " + std::to_string(line_no) + ": bad number");
      }
    }
    if (values.size() < header.size())
      throw InvalidInitialData("table '" + path + "' line " + std::to_string(line_no) + ": too few columns");
    rows.push_back({values[c_theta], values[c_omega], values[c_rho], values[c_u]});
  }
  return rows;
}

DensityProfile DensityProfile::parse(const std::string& text) {
  DensityProfile p;
  p.text = trim(text);
  std::string name;
  std::vector<double> args;
  const bool call = split_call(p.text, name, args);
  if (name == "table" && !call) {
    p.kind = Kind::table;
  } else if (name == "uniform") {
    p.kind = Kind::uniform;
    if (args.size() == 2) {
      p.lo = args[0];
      p.hi = args[1];
    } else if (!args.empty()) {
      throw ConfigError("uniform takes no arguments or a support interval (lo, hi)");
    }
  } else if ((name == "gaussian" || name == "normal") && call) {
    p.kind = Kind::gaussian;
    if (args.size() < 2 || args.size() > 3) throw ConfigError("gaussian(mu, sigma[, halfwidth]) expected");
    p.mu = args[0];
    p.sigma = args[1];
    if (!(p.sigma > 0.0)) throw ConfigError("gaussian sigma must be positive");
    if (args.size() == 3) {
      p.lo = p.mu - args[2];
      p.hi = p.mu + args[2];
    }
  } else if (name == "dirac" && call) {
    p.kind = Kind::dirac;
    if (args.size() != 1) throw ConfigError("dirac(theta0) expected");
    p.mu = args[0];
  } else {
    p.kind = Kind::expression;
    p.expr = Expression::parse(p.text);
  }
  p.lo = std::max(p.lo, -kPi);
  p.hi = std::min(p.hi, kPi);
  if (!(p.lo < p.hi) && p.kind != Kind::dirac) throw ConfigError("density support is empty: " + p.text);
  return p;
}

double DensityProfile::operator()(double theta, double omega) const {
  if (theta < lo || theta > hi) return 0.0;
  switch (kind) {
    case Kind::gaussian: {
      const double z = (theta - mu) / sigma;
      return std::exp(-0.5 * z * z);
    }
    case Kind::uniform:
      return 1.0;
    case Kind::expression:
      return (*expr)(theta, omega);
    case Kind::dirac:
    case Kind::table:
      break;
  }
  throw InvalidInitialData("density '" + text + "' has no pointwise value");
}

bool DensityProfile::compact() const noexcept {
  return kind == Kind::dirac || lo > -kPi || hi < kPi;
}

VelocityProfile VelocityProfile::parse(const std::string& text) {
  VelocityProfile p;
  p.text = trim(text);
  if (p.text == "table") {
    p.kind = Kind::table;
  } else {
    p.kind = Kind::expression;
    p.expr = Expression::parse(p.text);
  }
  return p;
}

Dual VelocityProfile::eval(double theta, double omega) const {
  if (kind != Kind::expression) throw InvalidInitialData("tabulated velocity has no symbolic value");
  return expr->eval(theta, omega);
}

InitSpec InitSpec::parse(const std::string& rho0, const std::string& u0, const std::string& table_path) {
  InitSpec spec;
  spec.rho0 = DensityProfile::parse(rho0);
  spec.u0 = VelocityProfile::parse(u0);
  const bool needs_table =
      spec.rho0.kind == DensityProfile::Kind::table || spec.u0.kind == VelocityProfile::Kind::table;
  if (needs_table) {
    if (table_path.empty()) throw ConfigError("a 'table' profile needs init_table to be set");
    spec.table = read_init_table(table_path);
  }
  return spec;
}

namespace {

// Locate (j, k) of a table row on the grids, or throw.
std::pair<std::size_t, std::size_t> locate_row(const InitRow& row, const ThetaGrid& grid, const OmegaGrid& omega) {
  const std::size_t j = grid.cell_of(row.theta);
  if (std::abs(wrap_phase(row.theta - grid.center(j))) > 1e-6 * grid.spacing() + 1e-12)
    throw InvalidInitialData("table theta " + std::to_string(row.theta) + " is not a cell centre");
  std::size_t k = 0;
  double best = std::abs(row.omega - omega.nodes[0]);
  for (std::size_t q = 1; q < omega.size(); ++q) {
    const double d = std::abs(row.omega - omega.nodes[q]);
    if (d < best) {
      best = d;
      k = q;
    }
  }
  if (best > 1e-9 * (1.0 + std::abs(row.omega)))
    throw InvalidInitialData("table omega " + std::to_string(row.omega) + " is not a frequency node");
  return {j, k};
}

}  // namespace

FieldState init_state(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega) {
  const std::size_t n = grid.size();
  FieldState state(n, omega.size());

  if (!spec.table.empty()) {
    std::vector<char> seen(n * omega.size(), 0);
    for (const InitRow& row : spec.table) {
      const auto [j, k] = locate_row(row, grid, omega);
      if (spec.rho0.kind == DensityProfile::Kind::table) state.rho[k * n + j] = row.rho;
      if (spec.u0.kind == VelocityProfile::Kind::table) state.u[k * n + j] = row.u;
      seen[k * n + j] = 1;
    }
    if (std::find(seen.begin(), seen.end(), 0) != seen.end())
      throw InvalidInitialData("initial-condition table does not cover every grid point");
  }

  for (std::size_t k = 0; k < omega.size(); ++k) {
    const double w = omega.nodes[k];
    auto rho = state.rho_slice(k);
    auto u = state.u_slice(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double theta = grid.center(j);
      switch (spec.rho0.kind) {
        case DensityProfile::Kind::table:
          break;
        case DensityProfile::Kind::dirac:
          rho[j] = (j == grid.cell_of(spec.rho0.mu)) ? 1.0 : 0.0;
          break;
        default:
          rho[j] = spec.rho0(theta, w);
      }
      if (spec.u0.symbolic()) u[j] = spec.u0.eval(theta, w).value;
    }
  }
  for (double r : state.rho) {
    if (r < 0.0 || !std::isfinite(r)) throw InvalidInitialData("initial density must be finite and nonnegative");
  }
  normalize_masses(state, grid);
  return state;
}

void normalize_masses(FieldState& state, const ThetaGrid& grid) {
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const double mass = state.slice_mass(k, grid.spacing());
    if (!(mass > 0.0) || !std::isfinite(mass)) throw InvalidInitialData("initial density slice has zero mass");
    const double scale = 1.0 / mass;
    for (double& r : state.rho_slice(k)) r *= scale;
  }
}

std::vector<double> centered_slope(const FieldState& state, const ThetaGrid& grid) {
  const std::size_t n = grid.size();
  std::vector<double> slope(state.u.size());
  const double inv = 1.0 / (2.0 * grid.spacing());
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    auto u = state.u_slice(k);
    for (std::size_t j = 0; j < n; ++j) {
      const double up = u[grid.wrap(static_cast<std::ptrdiff_t>(j) + 1)];
      const double dn = u[grid.wrap(static_cast<std::ptrdiff_t>(j) - 1)];
      slope[k * n + j] = (up - dn) * inv;
    }
  }
  return slope;
}

std::vector<double> initial_velocity_slope(const InitSpec& spec, const ThetaGrid& grid, const OmegaGrid& omega,
                                           const FieldState& initial) {
  if (!spec.u0.symbolic()) return centered_slope(initial, grid);
  const std::size_t n = grid.size();
  std::vector<double> slope(n * omega.size());
  for (std::size_t k = 0; k < omega.size(); ++k)
    for (std::size_t j = 0; j < n; ++j) slope[k * n + j] = spec.u0.eval(grid.center(j), omega.nodes[k]).slope;
  return slope;
}

}  // namespace kuramoto
