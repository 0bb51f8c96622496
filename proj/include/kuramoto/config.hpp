#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "kuramoto/experiments.hpp"

namespace kuramoto {

// A scenario plus the optional sweep section of one configuration file.
struct RunConfig {
  ScenarioConfig scenario;
  std::optional<SweepConfig> sweep;

  bool operator==(const RunConfig&) const = default;
};

// Parses YAML text, applying "dotted.key=value" overrides before validation.
// Unknown keys are rejected together in one error. Relative init_table paths
// are resolved against base_dir.
RunConfig parse_config_text(const std::string& text, const std::vector<std::string>& overrides = {},
                            const std::filesystem::path& base_dir = {});
RunConfig parse_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

// Fully resolved YAML; parse_config_text(to_yaml(c)) == c.
std::string to_yaml(const RunConfig& config);

}  // namespace kuramoto
