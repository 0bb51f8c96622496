#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "kuramoto/compare.hpp"
#include "kuramoto/config.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/experiments.hpp"
#include "kuramoto/io.hpp"
#include "kuramoto/lagrangian.hpp"
#include "kuramoto/version.hpp"

namespace fs = std::filesystem;
using namespace kuramoto;

namespace {

nlohmann::json optional_json(const std::optional<double>& x) { return x ? nlohmann::json(*x) : nlohmann::json(nullptr); }

nlohmann::json verdict_json(const ThresholdVerdict& v) {
  nlohmann::json j;
  j["verdict"] = verdict_name(v.verdict);
  j["min_du0"] = v.min_du0;
  j["margin"] = v.margin;
  j["d_minus"] = optional_json(v.roots.d_minus);
  j["d_plus"] = optional_json(v.roots.d_plus);
  j["d_star_minus"] = v.roots.d_star_minus;
  j["d_star_plus"] = v.roots.d_star_plus;
  j["blowup_time_bound"] = optional_json(v.blowup_time_bound);
  return j;
}

RunConfig load(const std::string& path, const std::vector<std::string>& overrides, bool deterministic) {
  RunConfig cfg = parse_config(path, overrides);
  if (deterministic) cfg.scenario.scheme.deterministic = true;
  return cfg;
}

int run_command(const RunConfig& cfg, const fs::path& out) {
  const ScenarioResult result = run_scenario(cfg.scenario);
  write_scenario_outputs(out, cfg.scenario, result, to_yaml(cfg));
  if (cfg.scenario.solver == SolverKind::lagrangian) {
    // Final characteristic states, one row per sample.
    std::ofstream traj(out / "trajectories.csv");
    write_trajectory_header(traj);
    write_trajectory_rows(traj, result.final_ensemble);
  }
  const SolverRun& run = result.eulerian ? *result.eulerian : *result.lagrangian;
  std::cerr << cfg.scenario.name << ": " << run.steps << " steps, " << run.series.size() << " records, "
            << io::format_double(result.wall_seconds) << " s";
  if (run.blowup_time) std::cerr << ", blow-up (" << run.blowup_reason << ") at t=" << io::format_double(*run.blowup_time);
  if (run.failure) std::cerr << ", failed: " << *run.failure;
  std::cerr << "\n";
  return run.failure ? 3 : 0;
}

int oracle_command(RunConfig cfg, const fs::path& out) {
  cfg.scenario.solver = SolverKind::lagrangian;
  return run_command(cfg, out);
}

int sweep_command(const RunConfig& cfg, const fs::path& out) {
  if (!cfg.sweep) throw ConfigError("configuration has no 'sweep' section");
  fs::create_directories(out);
  SweepResult result = hysteresis_sweep(*cfg.sweep, cfg.scenario, [](bool forward, const SweepPoint& p) {
    std::cerr << (forward ? "forward " : "backward") << " K=" << io::format_double(p.K)
              << " r_inf=" << io::format_double(p.r_inf) << (p.blowup ? " (blow-up)" : "")
              << (p.converged ? "" : " (not converged)") << "\n";
  });
  write_sweep(out / "sweep.csv", result);
  nlohmann::json m;
  m["name"] = cfg.scenario.name;
  m["code_version"] = kVersion;
  m["config"] = to_yaml(cfg);
  m["K_up"] = optional_json(result.K_up);
  m["K_down"] = optional_json(result.K_down);
  m["loop_area"] = result.loop_area;
  nlohmann::json jumps = nlohmann::json::array();
  for (const Jump& j : result.jumps)
    jumps.push_back({{"branch", j.forward ? "forward" : "backward"}, {"K_from", j.K_from}, {"K_to", j.K_to}, {"dr", j.dr}});
  m["jumps"] = jumps;
  io::write_text(out / "manifest.json", m.dump(2) + "\n");
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Hydrodynamic Kuramoto simulator"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);

  std::string config_path;
  std::string out_dir;
  std::vector<std::string> overrides;
  bool deterministic = false;
  const auto add_common = [&](CLI::App* sub, bool with_out) {
    sub->add_option("--config,-c", config_path, "YAML configuration")->required()->check(CLI::ExistingFile);
    if (with_out) sub->add_option("--out,-o", out_dir, "results directory")->required();
    sub->add_option("--set", overrides, "override a key, e.g. --set scheme.cfl=0.3");
    sub->add_flag("--deterministic", deterministic, "ordered reductions (bitwise reproducible)");
  };
  CLI::App* run = app.add_subcommand("run", "integrate a scenario");
  add_common(run, true);
  CLI::App* sweep = app.add_subcommand("sweep", "hysteresis sweep over K");
  add_common(sweep, true);
  CLI::App* oracle = app.add_subcommand("oracle", "Lagrangian oracle only");
  add_common(oracle, true);
  CLI::App* cls = app.add_subcommand("classify", "print the threshold verdict as JSON");
  add_common(cls, false);
  CLI::App* cmp = app.add_subcommand("compare", "compare two results directories");
  std::string dir_a, dir_b;
  cmp->add_option("dirA", dir_a)->required()->check(CLI::ExistingDirectory);
  cmp->add_option("dirB", dir_b)->required()->check(CLI::ExistingDirectory);

  CLI11_PARSE(app, argc, argv);
  try {
    if (*cmp) {
      std::cout << compare_runs(dir_a, dir_b).to_json() << "\n";
      return 0;
    }
    const RunConfig cfg = load(config_path, overrides, deterministic);
    if (*cls) {
      const ScenarioConfig& s = cfg.scenario;
      std::cout << verdict_json(classify(s.init(), s.theta_grid(), s.omega_grid(), s.params)).dump(2) << "\n";
      return 0;
    }
    if (*run) return run_command(cfg, out_dir);
    if (*oracle) return oracle_command(cfg, out_dir);
    return sweep_command(cfg, out_dir);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
