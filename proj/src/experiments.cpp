#include "kuramoto/experiments.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "json.hpp"

#include "kuramoto/error.hpp"
#include "kuramoto/io.hpp"
#include "kuramoto/parallel.hpp"
#include "kuramoto/version.hpp"

namespace kuramoto {

std::string_view solver_name(SolverKind s) noexcept {
  switch (s) {
    case SolverKind::eulerian: return "eulerian";
    case SolverKind::lagrangian: return "lagrangian";
    case SolverKind::both: return "both";
  }
  return "eulerian";
}

SolverKind parse_solver(const std::string& text) {
  if (text == "eulerian") return SolverKind::eulerian;
  if (text == "lagrangian") return SolverKind::lagrangian;
  if (text == "both") return SolverKind::both;
  throw ConfigError("solver must be eulerian, lagrangian or both, got '" + text + "'");
}

void ScenarioConfig::validate() const {
  params.validate();
  scheme.validate();
  if (grids.n_theta < 4) throw ConfigError("grid.n_theta must be at least 4");
  if (u0.empty()) throw ConfigError("u0 is required");
  if (!(t_end > 0.0)) throw ConfigError("t_end must be positive");
  if (!(record_dt > 0.0)) throw ConfigError("record_dt must be positive");
  if (!(support_rel > 0.0 && support_rel < 1.0)) throw ConfigError("support_rel must lie in (0, 1)");
  for (double t : snapshot_times)
    if (!(t >= 0.0 && t <= t_end)) throw ConfigError("snapshot times must lie in [0, t_end]");
  if (oracle.samples < 2) throw ConfigError("oracle.samples must be at least 2");
  if (!(oracle.dt > 0.0)) throw ConfigError("oracle.dt must be positive");
  if (!(oracle.eps_blow > 0.0)) throw ConfigError("oracle.eps_blow must be positive");
  const FrequencySpec f = frequency();
  if (f.kind == FrequencyKind::normal) {
    if (grids.n_omega < 2) throw ConfigError("grid.n_omega must be at least 2 for a frequency density");
    if (!(grids.L > 0.0)) throw ConfigError("grid.L must be positive");
  }
}

FrequencySpec ScenarioConfig::frequency() const { return FrequencySpec::parse(g); }
InitSpec ScenarioConfig::init() const { return InitSpec::parse(rho0, u0, init_table); }
ThetaGrid ScenarioConfig::theta_grid() const { return make_theta_grid(grids.n_theta); }
OmegaGrid ScenarioConfig::omega_grid() const { return discretize_frequency(frequency(), grids.n_omega, grids.L); }

void SweepConfig::validate() const {
  if (!(K_min >= 0.0)) throw ConfigError("sweep.K_min must be nonnegative");
  if (!(K_max >= K_min)) throw ConfigError("sweep.K_max must not be below K_min");
  if (!(K_step > 0.0)) throw ConfigError("sweep.K_step must be positive");
  if (!(refine_step > 0.0 && refine_step < K_step)) throw ConfigError("sweep.refine_step must lie in (0, K_step)");
  if (!(refine_window > 0.0)) throw ConfigError("sweep.refine_window must be positive");
  if (!(steady_tol > 0.0)) throw ConfigError("sweep.steady_tol must be positive");
  if (!(steady_window > 0.0)) throw ConfigError("sweep.steady_window must be positive");
  if (!(t_max >= steady_window)) throw ConfigError("sweep.t_max must be at least steady_window");
  if (!(jump_threshold > 0.0)) throw ConfigError("sweep.jump_threshold must be positive");
  if (!(sample_dt > 0.0 && sample_dt <= steady_window)) throw ConfigError("sweep.sample_dt must lie in (0, steady_window]");
}

std::vector<double> SweepConfig::K_path() const {
  const auto n = static_cast<std::size_t>(std::llround((K_max - K_min) / K_step));
  std::vector<double> path;
  for (std::size_t i = 0; i <= n; ++i) path.push_back(K_min + static_cast<double>(i) * K_step);
  if (!path.empty() && std::abs(path.back() - K_max) < 1e-9 * (1.0 + K_max)) path.back() = K_max;
  return path;
}

Marginals marginalize(const FieldState& state, const OmegaGrid& omega) {
  Marginals m{std::vector<double>(state.n_theta, 0.0), std::vector<double>(state.n_theta, 0.0)};
  for (std::size_t k = 0; k < state.n_omega; ++k) {
    const auto rho = state.rho_slice(k);
    const auto u = state.u_slice(k);
    for (std::size_t j = 0; j < state.n_theta; ++j) {
      m.rho[j] += omega.weights[k] * rho[j];
      m.u[j] += omega.weights[k] * u[j];
    }
  }
  return m;
}

namespace {

bool near(double a, double b) { return std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(b)); }

// Record and snapshot times merged into one increasing list of stops.
class StopSchedule {
 public:
  StopSchedule(double record_dt, double t_end, std::vector<double> snapshots)
      : record_dt_(record_dt), t_end_(t_end), snaps_(std::move(snapshots)) {
    std::sort(snaps_.begin(), snaps_.end());
  }

  double next_stop(double t) const {
    double stop = t_end_;
    const double rec = next_record(t);
    stop = std::min(stop, rec);
    for (double s : snaps_)
      if (s > t && !near(t, s)) {
        stop = std::min(stop, s);
        break;
      }
    return stop;
  }

  double next_record(double t) const {
    auto i = static_cast<long long>(std::floor(t / record_dt_ + 1e-9)) + 1;
    return std::min(t_end_, static_cast<double>(i) * record_dt_);
  }

  bool is_record(double t) const {
    const double q = t / record_dt_;
    return near(t, t_end_) || std::abs(q - std::round(q)) < 1e-9;
  }

  bool is_snapshot(double t) const {
    return std::any_of(snaps_.begin(), snaps_.end(), [&](double s) { return near(t, s); });
  }

  double t_end() const noexcept { return t_end_; }

 private:
  double record_dt_;
  double t_end_;
  std::vector<double> snaps_;
};

SolverRun run_eulerian(const ScenarioConfig& cfg, const ThetaGrid& grid, const OmegaGrid& omega,
                       FieldState& state, const EulerianObserver& observer) {
  SolverRun run;
  FvSolver solver(cfg.params, grid, omega, cfg.scheme);
  const double max_rho0 = max_density(state);
  const double floor = cfg.support_rel * max_rho0;
  BlowupMonitor monitor(max_rho0, cfg.scheme);
  TrapezoidIntegral ek_integral;
  const StopSchedule schedule(cfg.record_dt, cfg.t_end, cfg.snapshot_times);

  double last_recorded = -1.0;
  const auto record = [&] {
    if (state.t == last_recorded) return;
    TimeSeriesRecord rec = make_record(state, grid, omega, order_parameter(state, grid, omega), cfg.params, floor);
    rec.Ek_integral = ek_integral.add(rec.t, rec.Ek);
    run.series.push_back(rec);
    last_recorded = state.t;
  };
  const auto snapshot = [&] { run.snapshots.push_back({state.t, state.rho, state.u}); };

  record();
  if (schedule.is_snapshot(state.t)) snapshot();
  while (state.t < cfg.t_end && !near(state.t, cfg.t_end)) {
    const double stop = schedule.next_stop(state.t);
    const StepInfo info = solver.step(state, stop);
    if (info.status == StepStatus::nonfinite) {
      monitor.update(state.t + info.dt, 0.0, 0.0, true);
      run.blowup_time = monitor.time();
      run.blowup_reason = monitor.reason();
      record();
      break;
    }
    if (info.status == StepStatus::clip_exceeded) {
      run.failure = "clipped negative mass " + io::format_double(info.clipped_mass) + " exceeds clip_limit at t=" +
                    io::format_double(state.t);
      record();
      break;
    }
    ++run.steps;
    run.clipped_mass += info.clipped_mass;
    if (near(state.t, stop)) state.t = stop;
    if (observer && !observer(state, info)) {
      record();
      break;
    }
    if (monitor.update(state, grid)) {
      run.blowup_time = monitor.time();
      run.blowup_reason = monitor.reason();
      record();
      break;
    }
    if (schedule.is_record(state.t)) record();
    if (schedule.is_snapshot(state.t)) snapshot();
  }
  return run;
}

SolverRun run_oracle(const ScenarioConfig& cfg, const ThetaGrid& grid, Ensemble& ens,
                     const EnsembleObserver& observer) {
  SolverRun run;
  TrapezoidIntegral ek_integral;
  const StopSchedule schedule(cfg.record_dt, cfg.t_end, cfg.snapshot_times);
  const auto record = [&](const Ensemble& e, const OrderParam& op) {
    TimeSeriesRecord rec = make_record(e, op, cfg.params);
    rec.Ek_integral = ek_integral.add(rec.t, rec.Ek);
    run.series.push_back(rec);
  };
  const OracleObserver obs = [&](const Ensemble& e, const OrderParam& op) {
    if (e.t > 0.0) ++run.steps;
    if (e.blown_up) {
      run.blowup_time = e.blowup_time;
      run.blowup_reason = "gradient";
      record(e, op);
      return false;
    }
    if (schedule.is_record(e.t)) record(e, op);
    if (schedule.is_snapshot(e.t)) {
      PushforwardFields f = pushforward_fields(e, grid);
      run.snapshots.push_back({e.t, std::move(f.rho), std::move(f.u)});
    }
    return !observer || observer(e, op);
  };
  try {
    evolve(ens, cfg.params, cfg.t_end, OracleConfig{cfg.oracle.dt, cfg.oracle.eps_blow}, obs);
  } catch (const IntegrationFailure& e) {
    run.failure = std::string(e.what()) + " (last valid t=" + io::format_double(e.last_valid_time()) + ")";
  }
  return run;
}

}  // namespace

ScenarioResult run_scenario(const ScenarioConfig& config, const RunHooks& hooks) {
  const auto start = std::chrono::steady_clock::now();
  config.validate();
  const ThetaGrid grid = config.theta_grid();
  const OmegaGrid omega = config.omega_grid();
  const InitSpec spec = config.init();

  ScenarioResult result;
  result.final_state = init_state(spec, grid, omega);
  result.verdict = classify(spec, grid, omega, config.params);

  if (config.solver != SolverKind::lagrangian) {
    FieldState state = result.final_state;
    result.eulerian = run_eulerian(config, grid, omega, state, hooks.eulerian);
    result.final_state = std::move(state);
  }
  if (config.solver != SolverKind::eulerian) {
    const bool symbolic = spec.u0.symbolic() && spec.rho0.kind != DensityProfile::Kind::table;
    result.final_ensemble = symbolic ? sample_initial(spec, omega, config.oracle.samples)
                                     : sample_initial(init_state(spec, grid, omega), grid, omega, config.oracle.samples);
    result.lagrangian = run_oracle(config, grid, result.final_ensemble, hooks.lagrangian);
  }
  result.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

SteadyResult steady_r(const ScenarioConfig& base, double K, const SweepConfig& sweep, const FieldState& warm_start) {
  Params params = base.params;
  params.K = K;
  const ThetaGrid grid = base.theta_grid();
  const OmegaGrid omega = base.omega_grid();
  FvSolver solver(params, grid, omega, base.scheme);
  BlowupMonitor monitor(max_density(warm_start), base.scheme);

  SteadyResult out;
  out.state = warm_start;
  out.state.t = 0.0;
  const auto window = static_cast<std::size_t>(std::llround(sweep.steady_window / sweep.sample_dt));
  std::vector<double> history{order_parameter(out.state, grid, omega).r};
  std::size_t samples = 0;
  while (true) {
    const double stop = std::min(sweep.t_max, static_cast<double>(samples + 1) * sweep.sample_dt);
    const StepInfo info = solver.step(out.state, stop);
    if (info.status != StepStatus::ok || monitor.update(out.state, grid)) {
      out.blowup = true;
      break;
    }
    if (near(out.state.t, stop)) {
      out.state.t = stop;
      ++samples;
      history.push_back(order_parameter(out.state, grid, omega).r);
      if (history.size() > window && std::abs(history.back() - history[history.size() - 1 - window]) < sweep.steady_tol) {
        out.converged = true;
        break;
      }
      if (stop >= sweep.t_max) break;
    }
  }
  out.t_used = out.state.t;
  // A blow-up is read as concentration onto a Dirac mass.
  out.r_inf = out.blowup ? 1.0 : history.back();
  return out;
}

void analyse_sweep(SweepResult& result, double jump_threshold) {
  result.jumps.clear();
  result.K_up.reset();
  result.K_down.reset();
  const auto scan = [&](const std::vector<SweepPoint>& branch, bool forward) -> std::optional<double> {
    std::optional<double> where;
    double largest = 0.0;
    for (std::size_t i = 0; i + 1 < branch.size(); ++i) {
      const double dr = branch[i + 1].r_inf - branch[i].r_inf;
      if (std::abs(dr) <= jump_threshold) continue;
      result.jumps.push_back({forward, branch[i].K, branch[i + 1].K, dr});
      if (std::abs(dr) > largest) {
        largest = std::abs(dr);
        where = 0.5 * (branch[i].K + branch[i + 1].K);
      }
    }
    return where;
  };
  result.K_up = scan(result.forward, true);
  result.K_down = scan(result.backward, false);

  std::map<double, double> fwd;
  for (const auto& p : result.forward) fwd[p.K] = p.r_inf;
  std::vector<std::pair<double, double>> gap;
  for (const auto& p : result.backward) {
    const auto it = fwd.find(p.K);
    if (it != fwd.end()) gap.emplace_back(p.K, std::abs(p.r_inf - it->second));
  }
  std::sort(gap.begin(), gap.end());
  result.loop_area = 0.0;
  for (std::size_t i = 0; i + 1 < gap.size(); ++i)
    result.loop_area += 0.5 * (gap[i + 1].first - gap[i].first) * (gap[i].second + gap[i + 1].second);
}

namespace {

SweepResult sweep_path(const std::vector<double>& path, const SweepConfig& sweep, const ScenarioConfig& base,
                       const SweepProgress& progress) {
  SweepResult result;
  FieldState state = init_state(base.init(), base.theta_grid(), base.omega_grid());
  const auto visit = [&](double K, bool forward) {
    SteadyResult s = steady_r(base, K, sweep, state);
    const SweepPoint p{K, s.r_inf, s.blowup, s.converged, s.t_used};
    (forward ? result.forward : result.backward).push_back(p);
    state = std::move(s.state);
    if (progress) progress(forward, p);
  };
  for (double K : path) visit(K, true);
  for (auto it = path.rbegin(); it != path.rend(); ++it) visit(*it, false);
  return result;
}

}  // namespace

SweepResult hysteresis_sweep(const SweepConfig& sweep, const ScenarioConfig& base, const SweepProgress& progress) {
  sweep.validate();
  base.validate();
  std::vector<double> path = sweep.K_path();
  SweepResult result = sweep_path(path, sweep, base, progress);
  analyse_sweep(result, sweep.jump_threshold);
  if (sweep.refine && !result.jumps.empty()) {
    for (const Jump& j : result.jumps) {
      const double mid = 0.5 * (j.K_from + j.K_to);
      const auto steps = static_cast<long long>(std::llround(sweep.refine_window / sweep.refine_step));
      for (long long i = -steps; i <= steps; ++i) {
        const double K = mid + static_cast<double>(i) * sweep.refine_step;
        if (K >= sweep.K_min && K <= sweep.K_max) path.push_back(K);
      }
    }
    std::sort(path.begin(), path.end());
    path.erase(std::unique(path.begin(), path.end(), [](double a, double b) { return std::abs(a - b) < 1e-9; }),
               path.end());
    result = sweep_path(path, sweep, base, progress);
    analyse_sweep(result, sweep.jump_threshold);
  }
  return result;
}

std::string snapshot_name(double t) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "t=%.10g.csv", t);
  return buf;
}

void write_series(const std::filesystem::path& path, const std::vector<TimeSeriesRecord>& series) {
  const auto& cols = TimeSeriesRecord::columns();
  io::CsvWriter out(path, std::vector<std::string>(cols.begin(), cols.end()));
  for (const auto& rec : series) {
    const auto v = rec.values();
    out.row(std::span<const double>(v.data(), v.size()));
  }
}

void write_snapshot(const std::filesystem::path& path, const Snapshot& snap, const ThetaGrid& grid,
                    const OmegaGrid& omega, bool marginal) {
  const std::size_t n = grid.size();
  if (marginal) {
    FieldState s(n, omega.size());
    s.rho = snap.rho;
    s.u = snap.u;
    const Marginals m = marginalize(s, omega);
    io::CsvWriter out(path, {"theta", "rho_tilde", "u_tilde"});
    for (std::size_t j = 0; j < n; ++j) out.row({grid.center(j), m.rho[j], m.u[j]});
    return;
  }
  io::CsvWriter out(path, {"theta", "omega", "rho", "u"});
  for (std::size_t k = 0; k < omega.size(); ++k)
    for (std::size_t j = 0; j < n; ++j) out.row({grid.center(j), omega.nodes[k], snap.rho[k * n + j], snap.u[k * n + j]});
}

void write_sweep(const std::filesystem::path& path, const SweepResult& result) {
  io::CsvWriter out(path, {"branch", "K", "r_inf", "blowup_flag"});
  for (const auto& p : result.forward) out.row(std::string("forward"), std::vector<double>{p.K, p.r_inf, p.blowup ? 1.0 : 0.0});
  for (const auto& p : result.backward)
    out.row(std::string("backward"), std::vector<double>{p.K, p.r_inf, p.blowup ? 1.0 : 0.0});
}

namespace {

nlohmann::json run_summary(const SolverRun& run) {
  nlohmann::json j;
  j["steps"] = run.steps;
  j["records"] = run.series.size();
  j["blowup_time"] = run.blowup_time ? nlohmann::json(*run.blowup_time) : nlohmann::json(nullptr);
  j["blowup_reason"] = run.blowup_reason;
  j["failure"] = run.failure ? nlohmann::json(*run.failure) : nlohmann::json(nullptr);
  j["clipped_mass"] = run.clipped_mass;
  std::vector<double> times;
  for (const auto& s : run.snapshots) times.push_back(s.t);
  j["snapshot_times"] = times;
  return j;
}

void write_run_dir(const std::filesystem::path& dir, const ScenarioConfig& config, const ScenarioResult& result,
                   const SolverRun& run, std::string_view solver, const std::string& config_yaml) {
  std::filesystem::create_directories(dir / "snapshots");
  const ThetaGrid grid = config.theta_grid();
  const OmegaGrid omega = config.omega_grid();
  write_series(dir / "series.csv", run.series);
  for (const auto& snap : run.snapshots)
    write_snapshot(dir / "snapshots" / snapshot_name(snap.t), snap, grid, omega, config.marginal_snapshots);

  nlohmann::json m;
  m["name"] = config.name;
  m["solver"] = solver;
  m["code_version"] = kVersion;
  m["config"] = config_yaml;
  m["wall_seconds"] = result.wall_seconds;
  m["simd"] = simd::isa_name(simd::active_kernels().isa);
  m["threads"] = thread_count();
  m["ordered_reduction"] = config.scheme.deterministic;
  m["grid"] = {{"n_theta", grid.size()}, {"n_omega", omega.size()}, {"omega_nodes", omega.nodes},
               {"omega_weights", omega.weights}};
  m["marginal_snapshots"] = config.marginal_snapshots;
  nlohmann::json v;
  v["verdict"] = verdict_name(result.verdict.verdict);
  v["min_du0"] = result.verdict.min_du0;
  v["blowup_time_bound"] =
      result.verdict.blowup_time_bound ? nlohmann::json(*result.verdict.blowup_time_bound) : nlohmann::json(nullptr);
  m["classification"] = v;
  m["run"] = run_summary(run);
  io::write_text(dir / "manifest.json", m.dump(2) + "\n");
}

}  // namespace

void write_scenario_outputs(const std::filesystem::path& dir, const ScenarioConfig& config,
                            const ScenarioResult& result, const std::string& config_yaml) {
  if (result.eulerian) {
    write_run_dir(dir, config, result, *result.eulerian, "eulerian", config_yaml);
    if (result.lagrangian) write_run_dir(dir / "oracle", config, result, *result.lagrangian, "lagrangian", config_yaml);
  } else if (result.lagrangian) {
    write_run_dir(dir, config, result, *result.lagrangian, "lagrangian", config_yaml);
  }
}

}  // namespace kuramoto
