#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "smoothbandit/inference.hpp"
#include "smoothbandit/policy.hpp"

namespace smoothbandit {

/// Per-trial record of one policy variant's run.
struct TrialMetrics {
  std::uint64_t seed = 0;
  PolicyKind variant = PolicyKind::mle;
  int arm_count = 0;
  std::int64_t batch_size = 0;

  // Per update (index 0 is update 1).
  std::vector<std::vector<double>> shares;
  std::vector<double> best_arm_share;
  std::vector<double> second_third_share;
  std::vector<double> regret;
  std::vector<double> mse;
  std::vector<std::vector<double>> true_rewards;  // truth in effect when each update's units were allocated

  std::vector<BayesFactorTrace> pairs;

  // Per trial.
  std::vector<double> initial_rewards;
  double best_vs_next_effect = 0.0;
  double true_reward_variance = 0.0;
  double estimated_reward_variance = 0.0;  // across arms, final-update belief means
  std::vector<double> final_estimates;
  std::vector<int> change_permutation;
};

struct BootstrapCI {
  double point = 0.0;
  double lo = 0.0;
  double hi = 0.0;
  int iterations = 1000;
};

/// Allocation shares per arm; all zeros for an empty batch.
std::vector<double> allocation_shares(const AllocationPlan& plan);

/// Arms ordered best first by reward (ties keep lower arm id first).
std::vector<int> rank_arms(std::span<const double> truth);

/// Across-trial mean of |share_u - share_{u-1}|; output index 0 is the
/// change into update 2. Every series needs at least two entries, all of
/// the same length.
std::vector<double> allocation_change(std::span<const std::vector<double>> series_per_trial);

/// Expected shortfall of the allocation mix relative to the best arm.
double regret(const AllocationPlan& plan, std::span<const double> truth);

double mse(std::span<const double> estimates, std::span<const double> truth);

/// Unbiased sample variance; needs at least two values.
double inter_trial_variance(std::span<const double> values);

/// Pearson r; empty when there are fewer than 3 pairs or either series has
/// zero variance.
std::optional<double> truth_estimate_correlation(std::span<const double> truth_variance,
                                                 std::span<const double> estimate_variance);

/// Percentile bootstrap of the mean.
BootstrapCI bootstrap_ci(std::span<const double> samples, int iterations = 1000, double level = 0.95,
                         std::uint64_t seed = 0);

double median(std::vector<double> values);

/// Population variance across arms.
double spread(std::span<const double> values);

}  // namespace smoothbandit
