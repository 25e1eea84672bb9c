#include "smoothbandit/estimation.hpp"

#include <algorithm>
#include <cmath>

#include "smoothbandit/errors.hpp"

namespace smoothbandit {

namespace {
constexpr double kColdMean = 0.5;
constexpr double kColdVar = 0.25;
}  // namespace

CumulativeEstimate accumulate(std::span<const BatchStats> batches, MeanBasis basis) {
  require(!batches.empty(), "accumulate: empty window");
  CumulativeEstimate out;
  out.arm_id = batches.front().arm_id;
  std::int64_t sum = 0;
  for (const auto& b : batches) {
    require(b.arm_id == out.arm_id, "accumulate: batches from more than one arm");
    require(b.response_sum >= 0 && b.response_sum <= b.response_count,
            "accumulate: response_sum outside [0, response_count]");
    sum += b.response_sum;
    out.total_responses += b.response_count;
    out.total_allocated += b.allocated;
  }
  const auto units = basis == MeanBasis::responses ? out.total_responses : out.total_allocated;
  if (units == 0) return out;

  // Under the allocation basis a sliding window can hold responses to
  // allocations made before it, so the success count is capped.
  const auto n = static_cast<double>(units);
  out.has_data = true;
  out.mean = static_cast<double>(std::min(sum, units)) / n;
  // Bernoulli variance, evaluated no lower than at half a success so that
  // all-zero (or all-one) arms keep a usable spread.
  const double half = 0.5 / n;
  out.se2 = std::max(out.mean * (1.0 - out.mean), half * (1.0 - half)) / n;
  return out;
}

ShrinkResult shrink(std::span<const CumulativeEstimate> cumulatives, int update_index) {
  require(!cumulatives.empty(), "shrink: no arms");

  ShrinkResult result;
  auto& ctx = result.context;
  double total = 0.0;
  for (const auto& c : cumulatives) {
    if (!c.has_data) continue;
    total += c.mean;
    ++ctx.arm_count;
  }

  result.estimates.reserve(cumulatives.size());
  if (ctx.arm_count == 0) {
    ctx.grand_mean = kColdMean;
    for (const auto& c : cumulatives)
      result.estimates.push_back({c.arm_id, update_index, kColdMean, kColdVar, 0.0});
    return result;
  }

  const double k = ctx.arm_count;
  ctx.grand_mean = total / k;
  for (const auto& c : cumulatives) {
    if (!c.has_data) continue;
    const double dev = c.mean - ctx.grand_mean;
    ctx.dispersion += dev * dev;
  }
  ctx.shrinkage_enabled = ctx.arm_count >= 4;

  double max_var = kVarianceFloor;
  for (const auto& c : cumulatives) {
    ShrunkEstimate e{c.arm_id, update_index, 0.0, 0.0, 0.0};
    if (c.has_data) {
      double xi = 0.0;
      if (ctx.shrinkage_enabled) {
        if (ctx.dispersion > 0.0)
          xi = std::min(c.se2 * (k - 3.0) / ctx.dispersion, 1.0);
        else
          xi = c.se2 > 0.0 ? 1.0 : 0.0;
      }
      const double dev = c.mean - ctx.grand_mean;
      e.shrinkage = xi;
      e.js_mean = xi > 0.0 ? ctx.grand_mean + (1.0 - xi) * dev : c.mean;
      double var = (1.0 - xi) * c.se2;
      if (xi > 0.0) var += xi * ctx.dispersion / k + 2.0 * xi * xi * dev * dev / (k - 3.0);
      e.js_var = std::max(var, kVarianceFloor);
      max_var = std::max(max_var, e.js_var);
    }
    result.estimates.push_back(e);
  }

  for (std::size_t i = 0; i < cumulatives.size(); ++i) {
    if (cumulatives[i].has_data) continue;
    result.estimates[i].js_mean = ctx.grand_mean;
    result.estimates[i].js_var = max_var;
  }
  return result;
}

std::vector<double> weights(const SmoothingScheme& scheme, int available) {
  require(available >= 1, "weights: need at least one available update");
  require(scheme.window_length >= 1, "weights: window length must be >= 1");
  require(available <= scheme.window_length, "weights: more updates than the window holds");

  std::vector<double> w(static_cast<std::size_t>(available), 0.0);
  const double window = scheme.window_length;
  switch (scheme.variant) {
    case SmoothingVariant::last_only:
      w[0] = 1.0;
      return w;
    case SmoothingVariant::uniform:
      std::fill(w.begin(), w.end(), 1.0 / window);
      break;
    case SmoothingVariant::discounted:
      for (int u = 1; u <= available; ++u) w[u - 1] = 1.0 - (u - 1) / window;
      break;
  }

  double total = 0.0;
  for (double x : w) total += x;
  for (double& x : w) x /= total;
  return w;
}

SmoothedEstimate smooth(std::span<const ShrunkEstimate> history, const SmoothingScheme& scheme) {
  require(!history.empty(), "smooth: empty history");
  const auto used = std::min<std::size_t>(history.size(), static_cast<std::size_t>(scheme.window_length));
  const auto w = weights(scheme, static_cast<int>(used));

  SmoothedEstimate out{history.front().arm_id, 0.0, 0.0};
  for (std::size_t i = 0; i < used; ++i) {
    require(history[i].arm_id == out.arm_id, "smooth: history mixes arms");
    if (w[i] == 0.0) continue;
    out.mean += w[i] * history[i].js_mean;
    out.var += w[i] * history[i].js_var;
  }
  out.var = std::max(out.var, kVarianceFloor);
  return out;
}

}  // namespace smoothbandit
