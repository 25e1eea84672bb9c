#pragma once

// Experiment configuration: a JSON document whose nested keys mirror
// ExperimentConfig. See README.md for the full key list.

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "json.hpp"
#include "smoothbandit/environment.hpp"
#include "smoothbandit/policy.hpp"

namespace smoothbandit {

struct ExperimentConfig {
  ScenarioConfig scenario;
  std::vector<PolicyKind> variants{PolicyKind::mle, PolicyKind::veb, PolicyKind::useb, PolicyKind::dseb};
  int trials = 500;
  std::uint64_t base_seed = 20240611;
  int parallelism = 0;  // 0: one worker per hardware thread
  std::filesystem::path output_dir = "out";
  bool write_pair_csv = true;
  int bootstrap_iterations = 1000;

  /// Scenario checks plus trials >= 1, non-empty distinct variants, parallelism >= 0.
  void validate() const;
  /// Seed shared by every variant in trial t.
  std::uint64_t trial_seed(int trial) const;
};

/// Parses a config document. Relative sample-file paths resolve against
/// `base_dir`. Unknown keys are rejected. Throws ConfigError.
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir);

/// Reads and parses a config file; throws ConfigError naming the file.
ExperimentConfig load_config(const std::filesystem::path& file);

/// Full config with every default filled in and absolute sample paths;
/// parse_config(to_json(c), any) reproduces c.
nlohmann::json to_json(const ExperimentConfig& config);

/// "mle,useb" -> kinds. Throws ConfigError on unknown or repeated names.
std::vector<PolicyKind> parse_variant_list(const std::string& list);

}  // namespace smoothbandit
