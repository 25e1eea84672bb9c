#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "smoothbandit/environment.hpp"
#include "smoothbandit/metrics.hpp"

namespace smoothbandit {

/// One arm's view of one update, as written to the per-update CSV.
struct ArmUpdateRow {
  int arm = 0;
  double true_reward = 0.0;
  double lambda = 0.0;
  std::int64_t allocated = 0;
  std::int64_t responses_received = 0;
  std::int64_t response_sum = 0;
  std::optional<double> mle_mean;
  double js_mean = 0.0;
  double js_var = 0.0;
  double smoothed_mean = 0.0;
  double smoothed_var = 0.0;
  double xi = 0.0;
};

struct UpdateSnapshot {
  int update = 1;
  const std::vector<ArmUpdateRow>& arms;
  double best_arm_share = 0.0;
  double regret = 0.0;
  double mse = 0.0;
  /// Traces after this update's value was appended.
  const std::vector<BayesFactorTrace>& pairs;
};

class TrialObserver {
 public:
  virtual ~TrialObserver() = default;
  virtual void on_update(const UpdateSnapshot& snapshot) = 0;
};

/// Runs one trial of one policy variant. Each update u:
///   beliefs from the window ending at u-1, Thompson allocation, response
///   generation, change point (if u is the change point), delivery of due
///   responses, then estimates, metrics and Bayes factors for update u.
/// Deterministic in (scenario, variant, seed).
TrialMetrics run_trial(const ScenarioConfig& scenario, PolicyKind variant, std::uint64_t seed,
                       TrialObserver* observer = nullptr);

}  // namespace smoothbandit
