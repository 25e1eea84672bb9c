#include "smoothbandit/trial.hpp"

#include <algorithm>
#include <deque>

namespace smoothbandit {

namespace {

struct ShrunkSlice {
  int update = 0;
  std::vector<ShrunkEstimate> arms;
};

std::vector<SmoothedEstimate> as_estimates(const std::vector<PosteriorBelief>& beliefs) {
  std::vector<SmoothedEstimate> out;
  out.reserve(beliefs.size());
  for (const auto& b : beliefs) out.push_back({b.arm_id, b.mean, b.var});
  return out;
}

}  // namespace

TrialMetrics run_trial(const ScenarioConfig& scenario, PolicyKind variant, std::uint64_t seed,
                       TrialObserver* observer) {
  World world = init_world(scenario, seed);
  Rng policy_rng = make_stream(seed, Stream::policy);
  const PolicyVariant policy{variant};
  const DecisionRule rule{scenario.bf_threshold_log10};
  const auto arm_count = static_cast<std::size_t>(scenario.arm_count);

  TrialMetrics metrics;
  metrics.seed = seed;
  metrics.variant = variant;
  metrics.arm_count = scenario.arm_count;
  metrics.batch_size = scenario.batch_size;
  metrics.initial_rewards = world.true_rewards();

  for (int i = 0; i < scenario.arm_count; ++i)
    for (int j = i + 1; j < scenario.arm_count; ++j) metrics.pairs.push_back({{i, j, scenario.mde}, {}, {}, 0.0});

  std::deque<std::vector<BatchStats>> stats_window;  // oldest first
  std::deque<ShrunkSlice> shrunk_window;             // oldest first
  std::vector<PosteriorBelief> beliefs(arm_count);
  for (std::size_t k = 0; k < arm_count; ++k) beliefs[k].arm_id = static_cast<int>(k);

  std::vector<std::vector<BatchStats>> by_arm(arm_count);
  std::vector<std::vector<ShrunkEstimate>> shrunk_recent_first;
  std::vector<CumulativeEstimate> cumulative(arm_count);
  std::vector<ArmUpdateRow> rows(arm_count);
  std::vector<double> means(arm_count);

  for (int u = 1; u <= scenario.updates; ++u) {
    auto plan = sample_allocation(beliefs, scenario.batch_size, policy_rng, u);
    const auto truth = world.true_rewards();
    world.generate_responses(plan);
    if (scenario.change_point && *scenario.change_point == u) world.apply_change_point();
    auto delivered = world.collect_due();

    // Active window ending at u.
    const int window = scenario.window_length_at(u);
    stats_window.push_back(delivered);
    while (static_cast<int>(stats_window.size()) > window) stats_window.pop_front();
    while (!shrunk_window.empty() && shrunk_window.front().update <= u - window) shrunk_window.pop_front();

    for (std::size_t k = 0; k < arm_count; ++k) {
      by_arm[k].clear();
      for (const auto& slice : stats_window) by_arm[k].push_back(slice[k]);
      cumulative[k] = accumulate(by_arm[k], scenario.mean_basis);
    }
    // Each cached slice is the shrunk estimate of the window that ended at its
    // update, so a sliding window of U reaches back up to 2U - 1 updates.
    auto shrunk = shrink(cumulative, u);
    if (shrunk.context.arm_count > 0) shrunk_window.push_back({u, shrunk.estimates});

    shrunk_recent_first.clear();
    for (auto it = shrunk_window.rbegin(); it != shrunk_window.rend(); ++it) shrunk_recent_first.push_back(it->arms);

    beliefs = update_beliefs(policy, {by_arm, shrunk_recent_first, window, scenario.mean_basis});

    // Metrics for update u, scored against the truth its units were allocated under.
    const auto shares = allocation_shares(plan);
    const auto ranking = rank_arms(truth);
    for (std::size_t k = 0; k < arm_count; ++k) means[k] = beliefs[k].mean;
    metrics.shares.push_back(shares);
    metrics.best_arm_share.push_back(shares[static_cast<std::size_t>(ranking[0])]);
    double runner_up = 0.0;
    for (std::size_t r = 1; r < std::min<std::size_t>(3, ranking.size()); ++r)
      runner_up += shares[static_cast<std::size_t>(ranking[r])];
    metrics.second_third_share.push_back(runner_up);
    metrics.regret.push_back(regret(plan, truth));
    metrics.mse.push_back(mse(means, truth));
    metrics.true_rewards.push_back(truth);

    const auto estimates = as_estimates(beliefs);
    for (auto& trace : metrics.pairs) {
      const auto hi = static_cast<std::size_t>(trace.pair.arm_hi);
      const auto lo = static_cast<std::size_t>(trace.pair.arm_lo);
      step_decision(trace, rule, bayes_factor(estimates[hi], estimates[lo], trace.pair));
    }

    if (observer) {
      const SmoothingScheme own{policy.smoothing(), window};
      std::vector<ShrunkEstimate> column;
      for (std::size_t k = 0; k < arm_count; ++k) {
        auto& row = rows[k];
        row.arm = static_cast<int>(k);
        row.true_reward = truth[k];
        row.lambda = world.arms()[k].delay_lambda;
        row.allocated = plan.counts[k];
        row.responses_received = delivered[k].response_count;
        row.response_sum = delivered[k].response_sum;
        row.mle_mean = cumulative[k].has_data ? std::optional<double>(cumulative[k].mean) : std::nullopt;
        row.js_mean = shrunk.estimates[k].js_mean;
        row.js_var = shrunk.estimates[k].js_var;
        row.xi = shrunk.estimates[k].shrinkage;
        if (shrunk_recent_first.empty()) {
          row.smoothed_mean = row.js_mean;
          row.smoothed_var = row.js_var;
        } else {
          column.clear();
          for (const auto& slice : shrunk_recent_first) column.push_back(slice[k]);
          const auto s = smooth(column, own);
          row.smoothed_mean = s.mean;
          row.smoothed_var = s.var;
        }
      }
      observer->on_update({u, rows, metrics.best_arm_share.back(), metrics.regret.back(), metrics.mse.back(),
                           metrics.pairs});
    }
  }

  const auto final_truth = world.true_rewards();
  for (auto& trace : metrics.pairs)
    trace.truth_delta = std::abs(final_truth[static_cast<std::size_t>(trace.pair.arm_hi)] -
                                 final_truth[static_cast<std::size_t>(trace.pair.arm_lo)]);

  const auto ranking = rank_arms(metrics.initial_rewards);
  if (ranking.size() >= 2)
    metrics.best_vs_next_effect = metrics.initial_rewards[static_cast<std::size_t>(ranking[0])] -
                                  metrics.initial_rewards[static_cast<std::size_t>(ranking[1])];
  metrics.true_reward_variance = spread(final_truth);
  metrics.final_estimates = means;
  metrics.estimated_reward_variance = spread(means);
  metrics.change_permutation = world.permutation();
  return metrics;
}

}  // namespace smoothbandit
