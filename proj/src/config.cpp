#include "kuramoto/config.hpp"

#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "kuramoto/error.hpp"
#include "kuramoto/io.hpp"

namespace kuramoto {

namespace {

const std::set<std::string>& known_keys() {
  static const std::set<std::string> keys{
      "name",
      "m",
      "K",
      "rho0",
      "u0",
      "g",
      "init_table",
      "solver",
      "grid",
      "grid.n_theta",
      "grid.n_omega",
      "grid.L",
      "time",
      "time.t_end",
      "time.record_dt",
      "time.snapshots",
      "scheme",
      "scheme.cfl",
      "scheme.max_dt",
      "scheme.blowup_rho_factor",
      "scheme.blowup_grad",
      "scheme.clip_limit",
      "scheme.deterministic",
      "oracle",
      "oracle.samples",
      "oracle.dt",
      "oracle.eps_blow",
      "output",
      "output.marginal",
      "output.support_rel",
      "sweep",
      "sweep.K_min",
      "sweep.K_max",
      "sweep.K_step",
      "sweep.refine",
      "sweep.refine_window",
      "sweep.refine_step",
      "sweep.steady_tol",
      "sweep.steady_window",
      "sweep.t_max",
      "sweep.jump_threshold",
      "sweep.sample_dt",
  };
  return keys;
}

bool is_section(const std::string& key) {
  return key == "grid" || key == "time" || key == "scheme" || key == "oracle" || key == "output" || key == "sweep";
}

void collect_unknown(const YAML::Node& node, const std::string& prefix, std::vector<std::string>& unknown) {
  for (const auto& kv : node) {
    const std::string key = prefix.empty() ? kv.first.as<std::string>() : prefix + "." + kv.first.as<std::string>();
    if (!known_keys().count(key)) {
      unknown.push_back(key);
      continue;
    }
    if (is_section(key)) {
      if (!kv.second.IsMap()) throw ConfigError("'" + key + "' must be a mapping");
      collect_unknown(kv.second, key, unknown);
    }
  }
}

std::vector<std::string> split_dots(const std::string& key) {
  std::vector<std::string> parts;
  std::stringstream in(key);
  std::string part;
  while (std::getline(in, part, '.')) parts.push_back(part);
  return parts;
}

void apply_override(YAML::Node& root, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos || eq == 0) throw ConfigError("override must look like key=value: '" + assignment + "'");
  const std::string key = assignment.substr(0, eq);
  if (!known_keys().count(key) || is_section(key)) throw ConfigError("unknown override key '" + key + "'");
  const YAML::Node value = YAML::Load(assignment.substr(eq + 1));
  const auto parts = split_dots(key);
  if (parts.size() == 1) {
    root[parts[0]] = value;
  } else {
    YAML::Node section = root[parts[0]];
    section[parts[1]] = value;
    root[parts[0]] = section;
  }
}

template <class T>
void read(const YAML::Node& node, const char* key, T& out, const std::string& path) {
  const YAML::Node v = node[key];
  if (!v || v.IsNull()) return;
  try {
    out = v.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError("invalid value for '" + path + key + "'");
  }
}

YAML::Node section(const YAML::Node& root, const char* key) {
  const YAML::Node n = root[key];
  return n ? n : YAML::Node(YAML::NodeType::Map);
}

}  // namespace

RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides,
                            const std::filesystem::path& base_dir) {
  YAML::Node root;
  try {
    root = YAML::Load(text);
  } catch (const YAML::Exception& e) {
    throw ConfigError(std::string("malformed configuration: ") + e.what());
  }
  if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
  if (!root.IsMap()) throw ConfigError("configuration must be a mapping");
  for (const auto& o : overrides) apply_override(root, o);

  std::vector<std::string> unknown;
  collect_unknown(root, "", unknown);
  if (!unknown.empty()) {
    std::string msg = "unknown configuration keys:";
    for (const auto& k : unknown) msg += " " + k;
    throw ConfigError(msg);
  }

  RunConfig cfg;
  ScenarioConfig& s = cfg.scenario;
  read(root, "name", s.name, "");
  read(root, "m", s.params.m, "");
  read(root, "K", s.params.K, "");
  read(root, "rho0", s.rho0, "");
  read(root, "u0", s.u0, "");
  read(root, "g", s.g, "");
  read(root, "init_table", s.init_table, "");
  if (!s.init_table.empty() && !base_dir.empty() && std::filesystem::path(s.init_table).is_relative())
    s.init_table = (base_dir / s.init_table).lexically_normal().string();
  std::string solver = std::string(solver_name(s.solver));
  read(root, "solver", solver, "");
  s.solver = parse_solver(solver);

  const YAML::Node grid = section(root, "grid");
  read(grid, "n_theta", s.grids.n_theta, "grid.");
  read(grid, "n_omega", s.grids.n_omega, "grid.");
  read(grid, "L", s.grids.L, "grid.");

  const YAML::Node time = section(root, "time");
  read(time, "t_end", s.t_end, "time.");
  read(time, "record_dt", s.record_dt, "time.");
  read(time, "snapshots", s.snapshot_times, "time.");

  const YAML::Node scheme = section(root, "scheme");
  read(scheme, "cfl", s.scheme.cfl, "scheme.");
  read(scheme, "max_dt", s.scheme.max_dt, "scheme.");
  read(scheme, "blowup_rho_factor", s.scheme.blowup_rho_factor, "scheme.");
  read(scheme, "blowup_grad", s.scheme.blowup_grad, "scheme.");
  read(scheme, "clip_limit", s.scheme.clip_limit, "scheme.");
  read(scheme, "deterministic", s.scheme.deterministic, "scheme.");

  const YAML::Node oracle = section(root, "oracle");
  read(oracle, "samples", s.oracle.samples, "oracle.");
  read(oracle, "dt", s.oracle.dt, "oracle.");
  read(oracle, "eps_blow", s.oracle.eps_blow, "oracle.");

  const YAML::Node output = section(root, "output");
  read(output, "marginal", s.marginal_snapshots, "output.");
  read(output, "support_rel", s.support_rel, "output.");

  if (const YAML::Node sw = root["sweep"]) {
    SweepConfig w;
    read(sw, "K_min", w.K_min, "sweep.");
    read(sw, "K_max", w.K_max, "sweep.");
    read(sw, "K_step", w.K_step, "sweep.");
    read(sw, "refine", w.refine, "sweep.");
    read(sw, "refine_window", w.refine_window, "sweep.");
    read(sw, "refine_step", w.refine_step, "sweep.");
    read(sw, "steady_tol", w.steady_tol, "sweep.");
    read(sw, "steady_window", w.steady_window, "sweep.");
    read(sw, "t_max", w.t_max, "sweep.");
    read(sw, "jump_threshold", w.jump_threshold, "sweep.");
    read(sw, "sample_dt", w.sample_dt, "sweep.");
    w.validate();
    cfg.sweep = w;
  }
  s.validate();
  return cfg;
}

RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  return parse_config_text(io::read_text(path), overrides, path.parent_path());
}

std::string to_yaml(const RunConfig& config) {
  const ScenarioConfig& s = config.scenario;
  YAML::Emitter out;
  out.SetDoublePrecision(17);
  out << YAML::BeginMap;
  out << YAML::Key << "name" << YAML::Value << YAML::DoubleQuoted << s.name;
  out << YAML::Key << "m" << YAML::Value << s.params.m;
  out << YAML::Key << "K" << YAML::Value << s.params.K;
  out << YAML::Key << "rho0" << YAML::Value << YAML::DoubleQuoted << s.rho0;
  out << YAML::Key << "u0" << YAML::Value << YAML::DoubleQuoted << s.u0;
  out << YAML::Key << "g" << YAML::Value << YAML::DoubleQuoted << s.g;
  out << YAML::Key << "init_table" << YAML::Value << YAML::DoubleQuoted << s.init_table;
  out << YAML::Key << "solver" << YAML::Value << std::string(solver_name(s.solver));
  out << YAML::Key << "grid" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "n_theta" << YAML::Value << s.grids.n_theta;
  out << YAML::Key << "n_omega" << YAML::Value << s.grids.n_omega;
  out << YAML::Key << "L" << YAML::Value << s.grids.L;
  out << YAML::EndMap;
  out << YAML::Key << "time" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "t_end" << YAML::Value << s.t_end;
  out << YAML::Key << "record_dt" << YAML::Value << s.record_dt;
  out << YAML::Key << "snapshots" << YAML::Value << YAML::Flow << s.snapshot_times;
  out << YAML::EndMap;
  out << YAML::Key << "scheme" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "cfl" << YAML::Value << s.scheme.cfl;
  out << YAML::Key << "max_dt" << YAML::Value << s.scheme.max_dt;
  out << YAML::Key << "blowup_rho_factor" << YAML::Value << s.scheme.blowup_rho_factor;
  out << YAML::Key << "blowup_grad" << YAML::Value << s.scheme.blowup_grad;
  out << YAML::Key << "clip_limit" << YAML::Value << s.scheme.clip_limit;
  out << YAML::Key << "deterministic" << YAML::Value << s.scheme.deterministic;
  out << YAML::EndMap;
  out << YAML::Key << "oracle" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "samples" << YAML::Value << s.oracle.samples;
  out << YAML::Key << "dt" << YAML::Value << s.oracle.dt;
  out << YAML::Key << "eps_blow" << YAML::Value << s.oracle.eps_blow;
  out << YAML::EndMap;
  out << YAML::Key << "output" << YAML::Value << YAML::BeginMap;
  out << YAML::Key << "marginal" << YAML::Value << s.marginal_snapshots;
  out << YAML::Key << "support_rel" << YAML::Value << s.support_rel;
  out << YAML::EndMap;
  if (config.sweep) {
    const SweepConfig& w = *config.sweep;
    out << YAML::Key << "sweep" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "K_min" << YAML::Value << w.K_min;
    out << YAML::Key << "K_max" << YAML::Value << w.K_max;
    out << YAML::Key << "K_step" << YAML::Value << w.K_step;
    out << YAML::Key << "refine" << YAML::Value << w.refine;
    out << YAML::Key << "refine_window" << YAML::Value << w.refine_window;
    out << YAML::Key << "refine_step" << YAML::Value << w.refine_step;
    out << YAML::Key << "steady_tol" << YAML::Value << w.steady_tol;
    out << YAML::Key << "steady_window" << YAML::Value << w.steady_window;
    out << YAML::Key << "t_max" << YAML::Value << w.t_max;
    out << YAML::Key << "jump_threshold" << YAML::Value << w.jump_threshold;
    out << YAML::Key << "sample_dt" << YAML::Value << w.sample_dt;
    out << YAML::EndMap;
  }
  out << YAML::EndMap;
  return std::string(out.c_str()) + "\n";
}

}  // namespace kuramoto
