#include "smoothbandit/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "smoothbandit/errors.hpp"
#include "smoothbandit/random.hpp"

namespace smoothbandit {

std::vector<double> allocation_shares(const AllocationPlan& plan) {
  std::vector<double> shares(plan.counts.size(), 0.0);
  const auto total = std::accumulate(plan.counts.begin(), plan.counts.end(), std::int64_t{0});
  if (total == 0) return shares;
  for (std::size_t k = 0; k < shares.size(); ++k)
    shares[k] = static_cast<double>(plan.counts[k]) / static_cast<double>(total);
  return shares;
}

std::vector<int> rank_arms(std::span<const double> truth) {
  std::vector<int> order(truth.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return truth[static_cast<std::size_t>(a)] > truth[static_cast<std::size_t>(b)]; });
  return order;
}

std::vector<double> allocation_change(std::span<const std::vector<double>> series_per_trial) {
  require(!series_per_trial.empty(), "allocation_change: no trials");
  const auto length = series_per_trial.front().size();
  require(length >= 2, "allocation_change: series needs at least two updates");

  std::vector<double> out(length - 1, 0.0);
  for (const auto& series : series_per_trial) {
    require(series.size() == length, "allocation_change: series lengths differ");
    for (std::size_t u = 1; u < length; ++u) out[u - 1] += std::abs(series[u] - series[u - 1]);
  }
  for (double& x : out) x /= static_cast<double>(series_per_trial.size());
  return out;
}

double regret(const AllocationPlan& plan, std::span<const double> truth) {
  require(plan.counts.size() == truth.size(), "regret: arm count mismatch");
  if (truth.empty()) return 0.0;
  const double best = *std::max_element(truth.begin(), truth.end());
  const auto total = std::accumulate(plan.counts.begin(), plan.counts.end(), std::int64_t{0});
  if (total == 0) return 0.0;
  double shortfall = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) shortfall += static_cast<double>(plan.counts[k]) * (best - truth[k]);
  return shortfall / static_cast<double>(total);
}

double mse(std::span<const double> estimates, std::span<const double> truth) {
  require(estimates.size() == truth.size(), "mse: arm count mismatch");
  require(!truth.empty(), "mse: no arms");
  double total = 0.0;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const double e = estimates[k] - truth[k];
    total += e * e;
  }
  return total / static_cast<double>(truth.size());
}

double inter_trial_variance(std::span<const double> values) {
  require(values.size() >= 2, "inter_trial_variance: need at least two trials");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / (n - 1.0);
}

std::optional<double> truth_estimate_correlation(std::span<const double> truth_variance,
                                                 std::span<const double> estimate_variance) {
  require(truth_variance.size() == estimate_variance.size(), "correlation: series lengths differ");
  const auto n = truth_variance.size();
  if (n < 3) return std::nullopt;
  const double mx = std::accumulate(truth_variance.begin(), truth_variance.end(), 0.0) / static_cast<double>(n);
  const double my = std::accumulate(estimate_variance.begin(), estimate_variance.end(), 0.0) / static_cast<double>(n);
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = truth_variance[i] - mx;
    const double dy = estimate_variance[i] - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0) return std::nullopt;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

namespace {

// Linear interpolation between order statistics (type 7).
double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

}  // namespace

BootstrapCI bootstrap_ci(std::span<const double> samples, int iterations, double level, std::uint64_t seed) {
  require(!samples.empty(), "bootstrap_ci: no samples");
  require(iterations >= 1, "bootstrap_ci: need at least one iteration");
  require(level > 0.0 && level < 1.0, "bootstrap_ci: level must lie in (0, 1)");

  const double n = static_cast<double>(samples.size());
  BootstrapCI ci;
  ci.iterations = iterations;
  ci.point = std::accumulate(samples.begin(), samples.end(), 0.0) / n;

  Rng rng(seed);
  std::uniform_int_distribution<std::size_t> pick(0, samples.size() - 1);
  std::vector<double> means(static_cast<std::size_t>(iterations));
  for (auto& m : means) {
    double total = 0.0;
    for (std::size_t i = 0; i < samples.size(); ++i) total += samples[pick(rng)];
    m = total / n;
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  ci.lo = quantile_sorted(means, tail);
  ci.hi = quantile_sorted(means, 1.0 - tail);
  return ci;
}

double median(std::vector<double> values) {
  require(!values.empty(), "median: no values");
  std::sort(values.begin(), values.end());
  return quantile_sorted(values, 0.5);
}

double spread(std::span<const double> values) {
  require(!values.empty(), "spread: no values");
  const double n = static_cast<double>(values.size());
  const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double ss = 0.0;
  for (double v : values) ss += (v - mean) * (v - mean);
  return ss / n;
}

}  // namespace smoothbandit
