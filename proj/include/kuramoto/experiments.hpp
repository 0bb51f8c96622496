#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "kuramoto/diagnostics.hpp"
#include "kuramoto/domain.hpp"
#include "kuramoto/fv_solver.hpp"
#include "kuramoto/lagrangian.hpp"
#include "kuramoto/thresholds.hpp"

namespace kuramoto {

enum class SolverKind { eulerian, lagrangian, both };

std::string_view solver_name(SolverKind s) noexcept;
SolverKind parse_solver(const std::string& text);

struct GridConfig {
  std::size_t n_theta = 1000;
  std::size_t n_omega = 600;  // ignored for a Dirac frequency distribution
  double L = 5.0;

  bool operator==(const GridConfig&) const = default;
};

struct OracleSettings {
  std::size_t samples = 512;  // per frequency node
  double dt = 1e-3;
  double eps_blow = 1e-6;

  bool operator==(const OracleSettings&) const = default;
};

struct ScenarioConfig {
  std::string name = "scenario";
  Params params;
  GridConfig grids;
  std::string rho0 = "gaussian(0, 1)";
  std::string u0;
  std::string g = "dirac(0)";
  std::string init_table;
  double t_end = 5.0;
  double record_dt = 0.05;
  std::vector<double> snapshot_times;
  SchemeConfig scheme;
  SolverKind solver = SolverKind::eulerian;
  OracleSettings oracle;
  bool marginal_snapshots = false;
  // Support floor of the Eulerian diameters, relative to max rho0.
  double support_rel = 1e-8;

  void validate() const;
  bool operator==(const ScenarioConfig&) const = default;

  FrequencySpec frequency() const;
  InitSpec init() const;
  ThetaGrid theta_grid() const;
  OmegaGrid omega_grid() const;
};

struct SweepConfig {
  double K_min = 0.0;
  double K_max = 4.0;
  double K_step = 0.1;
  bool refine = false;
  double refine_window = 0.3;
  double refine_step = 0.05;
  double steady_tol = 1e-4;
  double steady_window = 1.0;
  double t_max = 50.0;
  double jump_threshold = 0.1;
  double sample_dt = 0.1;  // spacing of the r history used by the steady test

  void validate() const;
  bool operator==(const SweepConfig&) const = default;

  // Ascending coupling values of the forward branch.
  std::vector<double> K_path() const;
};

struct Snapshot {
  double t = 0.0;
  std::vector<double> rho;  // FieldState layout
  std::vector<double> u;
};

struct SolverRun {
  std::vector<TimeSeriesRecord> series;
  std::vector<Snapshot> snapshots;
  std::optional<double> blowup_time;
  std::string blowup_reason;
  std::optional<std::string> failure;
  std::size_t steps = 0;
  double clipped_mass = 0.0;
};

struct ScenarioResult {
  ThresholdVerdict verdict;
  std::optional<SolverRun> eulerian;
  std::optional<SolverRun> lagrangian;
  FieldState final_state;
  Ensemble final_ensemble;
  double wall_seconds = 0.0;
};

// Eulerian observer: called after every accepted step with the state and the
// step report. Returning false stops the run.
using EulerianObserver = std::function<bool(const FieldState&, const StepInfo&)>;
using EnsembleObserver = std::function<bool(const Ensemble&, const OrderParam&)>;

struct RunHooks {
  EulerianObserver eulerian;
  EnsembleObserver lagrangian;
};

ScenarioResult run_scenario(const ScenarioConfig& config, const RunHooks& hooks = {});

// Omega-averaged fields: rho~ = sum_k w_k rho_k, u~ = sum_k w_k u_k.
struct Marginals {
  std::vector<double> rho;
  std::vector<double> u;
};
Marginals marginalize(const FieldState& state, const OmegaGrid& omega);

struct SteadyResult {
  double r_inf = 0.0;
  bool blowup = false;
  bool converged = false;
  double t_used = 0.0;
  FieldState state;
};

// Integrates from the warm start at the given coupling until r moves less
// than steady_tol over steady_window, or t_max elapses.
SteadyResult steady_r(const ScenarioConfig& base, double K, const SweepConfig& sweep, const FieldState& warm_start);

struct SweepPoint {
  double K = 0.0;
  double r_inf = 0.0;
  bool blowup = false;
  bool converged = false;
  double t_used = 0.0;
};

struct Jump {
  bool forward = true;
  double K_from = 0.0;
  double K_to = 0.0;
  double dr = 0.0;
};

struct SweepResult {
  std::vector<SweepPoint> forward;   // K ascending
  std::vector<SweepPoint> backward;  // K descending
  std::vector<Jump> jumps;
  std::optional<double> K_up;    // midpoint of the largest forward jump
  std::optional<double> K_down;  // midpoint of the largest backward jump
  double loop_area = 0.0;        // int |r_backward - r_forward| dK
};

using SweepProgress = std::function<void(bool forward, const SweepPoint&)>;

SweepResult hysteresis_sweep(const SweepConfig& sweep, const ScenarioConfig& base,
                             const SweepProgress& progress = {});

// Jump list, K_up/K_down and loop area from the two branches.
void analyse_sweep(SweepResult& result, double jump_threshold);

// Results directory writers.
void write_series(const std::filesystem::path& path, const std::vector<TimeSeriesRecord>& series);
void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const ThetaGrid& grid,
                    const OmegaGrid& omega, bool marginal);
void write_sweep(const std::filesystem::path& path, const SweepResult& result);
std::string snapshot_name(double t);

// Writes series.csv, snapshots/ and manifest.json; a lagrangian run of a
// "both" scenario goes to the oracle/ subdirectory with the same layout.
void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                            const ScenarioResult& result, const std::string& config_yaml);

}  // namespace kuramoto
