#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace kuramoto {

struct SnapshotDistance {
  std::string file;
  double t = 0.0;
  double l1 = 0.0;  // sum_k w_k dtheta sum_j |rho_A - rho_B|
};

struct CompareReport {
  std::vector<SnapshotDistance> snapshots;
  std::size_t matched_records = 0;
  double max_dr = 0.0;
  double max_dEk = 0.0;

  std::string to_json() const;
};

// Compares two results directories on their shared snapshot files and series
// times. Different grids raise GridMismatch.
CompareReport compare_runs(const std::filesystem::path& a, const std::filesystem::path& b);

}  // namespace kuramoto
