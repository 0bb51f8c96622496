#include "kuramoto/compare.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "kuramoto/error.hpp"
#include "kuramoto/io.hpp"

namespace kuramoto {

namespace {

struct RunInfo {
  std::size_t n_theta = 0;
  std::size_t n_omega = 0;
  std::vector<double> nodes;
  std::vector<double> weights;
  bool marginal = false;
};

RunInfo read_manifest(const std::filesystem::path& dir) {
  const auto m = nlohmann::json::parse(io::read_text(dir / "manifest.json"));
  RunInfo info;
  const auto& g = m.at("grid");
  info.n_theta = g.at("n_theta").get<std::size_t>();
  info.n_omega = g.at("n_omega").get<std::size_t>();
  info.nodes = g.at("omega_nodes").get<std::vector<double>>();
  info.weights = g.at("omega_weights").get<std::vector<double>>();
  info.marginal = m.value("marginal_snapshots", false);
  return info;
}

double parse_time(const std::string& file) {
  double t = 0.0;
  std::sscanf(file.c_str(), "t=%lf", &t);
  return t;
}

}  // namespace

CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b) {
  const RunInfo ia = read_manifest(a);
  const RunInfo ib = read_manifest(b);
  if (ia.n_theta != ib.n_theta || ia.n_omega != ib.n_omega)
    throw GridMismatch("runs use different grids (" + std::to_string(ia.n_theta) + "x" + std::to_string(ia.n_omega) +
                       " vs " + std::to_string(ib.n_theta) + "x" + std::to_string(ib.n_omega) + ")");
  for (std::size_t k = 0; k < ia.n_omega; ++k)
    if (std::abs(ia.nodes[k] - ib.nodes[k]) > 1e-12) throw GridMismatch("runs use different frequency nodes");
  if (ia.marginal != ib.marginal) throw GridMismatch("one run stores marginal snapshots and the other does not");

  CompareReport report;
  const double dtheta = 2.0 * 3.141592653589793 / static_cast<double>(ia.n_theta);
  std::vector<std::string> files;
  if (std::filesystem::exists(a / "snapshots"))
    for (const auto& e : std::filesystem::directory_iterator(a / "snapshots"))
      if (std::filesystem::exists(b / "snapshots" / e.path().filename())) files.push_back(e.path().filename().string());
  std::sort(files.begin(), files.end(), [](const std::string& x, const std::string& y) { return parse_time(x) < parse_time(y); });

  const std::string rho_col = ia.marginal ? "rho_tilde" : "rho";
  for (const auto& f : files) {
    const auto ra = io::read_csv(a / "snapshots" / f).numeric(rho_col);
    const auto rb = io::read_csv(b / "snapshots" / f).numeric(rho_col);
    if (ra.size() != rb.size()) throw GridMismatch("snapshot " + f + " has different sizes");
    double l1 = 0.0;
    const std::size_t slices = ia.marginal ? 1 : ia.n_omega;
    for (std::size_t k = 0; k < slices; ++k) {
      double s = 0.0;
      for (std::size_t j = 0; j < ia.n_theta; ++j) s += std::abs(ra[k * ia.n_theta + j] - rb[k * ia.n_theta + j]);
      l1 += (ia.marginal ? 1.0 : ia.weights[k]) * s;
    }
    report.snapshots.push_back({f, parse_time(f), l1 * dtheta});
  }

  const auto sa = io::read_csv(a / "series.csv");
  const auto sb = io::read_csv(b / "series.csv");
  const auto ta = sa.numeric("t");
  const auto tb = sb.numeric("t");
  const auto r_a = sa.numeric("r");
  const auto r_b = sb.numeric("r");
  const auto ek_a = sa.numeric("Ek");
  const auto ek_b = sb.numeric("Ek");
  std::size_t j = 0;
  for (std::size_t i = 0; i < ta.size(); ++i) {
    while (j < tb.size() && tb[j] < ta[i] - 1e-9) ++j;
    if (j == tb.size()) break;
    if (std::abs(tb[j] - ta[i]) > 1e-9) continue;
    ++report.matched_records;
    report.max_dr = std::max(report.max_dr, std::abs(r_a[i] - r_b[j]));
    report.max_dEk = std::max(report.max_dEk, std::abs(ek_a[i] - ek_b[j]));
  }
  return report;
}

std::string CompareReport::to_json() const {
  nlohmann::json j;
  j["matched_records"] = matched_records;
  j["max_abs_dr"] = max_dr;
  j["max_abs_dEk"] = max_dEk;
  nlohmann::json snaps = nlohmann::json::array();
  for (const auto& s : snapshots) snaps.push_back({{"file", s.file}, {"t", s.t}, {"l1_rho", s.l1}});
  j["snapshots"] = snaps;
  return j.dump(2);
}

}  // namespace kuramoto
