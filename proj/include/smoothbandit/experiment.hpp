#pragma once

#include <filesystem>
#include <functional>
#include <ostream>
#include <vector>

#include "json.hpp"
#include "smoothbandit/config.hpp"
#include "smoothbandit/trial.hpp"

namespace smoothbandit {

inline constexpr const char* kUpdatesCsv = "updates.csv";
inline constexpr const char* kPairsCsv = "pairs.csv";
inline constexpr const char* kSummaryJson = "summary.json";
inline constexpr const char* kManifestJson = "manifest.json";

inline constexpr const char* kUpdatesHeader =
    "trial,variant,update,arm,true_reward,lambda,allocated,responses_received,response_sum,mle_mean,js_mean,"
    "js_var,smoothed_mean,smoothed_var,xi,best_arm_share,regret_per_update,mse\n";
inline constexpr const char* kPairsHeader = "trial,variant,update,arm_hi,arm_lo,log10_bf,decided\n";

struct ExperimentOptions {
  /// Called after each finished trial (all variants) with (done, total).
  std::function<void(int, int)> progress;
};

struct ExperimentResult {
  nlohmann::json summary;
  nlohmann::json manifest;
};

/// Runs trials x variants with paired seeds and writes updates.csv,
/// pairs.csv (optional), summary.json and manifest.json into
/// config.output_dir. Output bytes do not depend on parallelism.
/// Throws IoError before any simulation when the directory is not writable.
ExperimentResult run_experiment(const ExperimentConfig& config, const ExperimentOptions& options = {});

/// Observer that renders one trial's rows in the CSV layouts above.
class CsvTrialWriter : public TrialObserver {
 public:
  CsvTrialWriter(int trial, PolicyKind variant, std::string& updates, std::string* pairs);
  void on_update(const UpdateSnapshot& snapshot) override;

 private:
  int trial_;
  std::string_view variant_;
  std::string& updates_;
  std::string* pairs_;
};

/// Aggregates per-trial metrics: by_variant[i][t] is trial t of
/// config.variants[i]. Only scalar series and decisions are read.
nlohmann::json summarize(const ExperimentConfig& config, const std::vector<std::vector<TrialMetrics>>& by_variant);

/// Re-runs one trial recorded in a manifest and writes its per-update CSV
/// rows (with header) exactly as the original run did. Throws ConfigError
/// on a malformed manifest or an out-of-range trial.
void replay_trial(const nlohmann::json& manifest, int trial, std::ostream& out);

}  // namespace smoothbandit
