#pragma once

// Empirical-Bayes reward estimation over a window of delayed, batched
// Bernoulli feedback: pooled cumulative statistics per arm, positive-part
// James-Stein shrinkage across arms, and weighted smoothing of recent
// shrunk estimates.

#include <cstdint>
#include <span>
#include <vector>

namespace smoothbandit {

/// Lower bound applied to every posterior variance handed to the sampler.
inline constexpr double kVarianceFloor = 1e-12;

/// What one arm saw at one update. `response_count` counts responses
/// delivered at this update, which may belong to allocations from earlier
/// updates, so it is unrelated to `allocated`.
struct BatchStats {
  int arm_id = 0;
  int update_index = 1;
  std::int64_t allocated = 0;
  std::int64_t response_sum = 0;
  std::int64_t response_count = 0;
};

struct CumulativeEstimate {
  int arm_id = 0;
  bool has_data = false;  // false: nothing to divide by in the window, mean/se2 undefined
  double mean = 0.0;
  double se2 = 0.0;
  std::int64_t total_responses = 0;
  std::int64_t total_allocated = 0;
};

struct ShrinkageContext {
  double grand_mean = 0.0;
  double dispersion = 0.0;  // sum of squared deviations from grand_mean
  int arm_count = 0;        // arms with data; the K used in the estimator
  bool shrinkage_enabled = false;  // false when fewer than 4 arms have data
};

struct ShrunkEstimate {
  int arm_id = 0;
  int update_index = 1;
  double js_mean = 0.0;
  double js_var = 0.0;
  double shrinkage = 0.0;  // xi in [0, 1]
};

struct ShrinkResult {
  std::vector<ShrunkEstimate> estimates;
  ShrinkageContext context;
};

enum class SmoothingVariant { last_only, uniform, discounted };

/// A weighting scheme over the `window_length` most recent updates. In
/// stationary (growing) mode callers pass the current update index as the
/// window length; in sliding mode, min(update, U).
struct SmoothingScheme {
  SmoothingVariant variant = SmoothingVariant::uniform;
  int window_length = 1;
};

struct SmoothedEstimate {
  int arm_id = 0;
  double mean = 0.0;
  double var = 0.0;
};

/// What the pooled success count is divided by.
///   responses:   responses delivered in the window (delay-free mean).
///   allocations: units allocated in the window. Responses still in flight
///                count as missing, so recent heavy allocation pulls the
///                mean down until the delayed responses arrive.
enum class MeanBasis { responses, allocations };

/// Pools one arm's batches: mean = successes / units, se2 = Bernoulli
/// variance of that mean (never below the half-success value). Throws
/// ContractViolation on mixed arm ids or an empty list.
CumulativeEstimate accumulate(std::span<const BatchStats> batches, MeanBasis basis = MeanBasis::responses);

/// Positive-part James-Stein shrinkage of per-arm cumulative means toward
/// their grand mean. Arms without data are left out of the grand mean and
/// dispersion; they receive the grand mean and the largest js_var among arms
/// with data. With no data anywhere every arm gets the (0.5, 0.25) prior.
ShrinkResult shrink(std::span<const CumulativeEstimate> cumulatives, int update_index = 1);

/// Normalized smoothing weights for `available` past updates, most recent
/// first. Requires 1 <= available <= scheme.window_length.
std::vector<double> weights(const SmoothingScheme& scheme, int available);

/// Weighted combination of one arm's shrunk estimates (most recent first).
/// Only the first scheme.window_length entries are used.
SmoothedEstimate smooth(std::span<const ShrunkEstimate> history, const SmoothingScheme& scheme);

}  // namespace smoothbandit
