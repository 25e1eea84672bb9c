#include "smoothbandit/policy.hpp"

#include <cmath>

#include "smoothbandit/errors.hpp"

namespace smoothbandit {

std::string_view to_string(PolicyKind kind) {
  switch (kind) {
    case PolicyKind::mle: return "mle";
    case PolicyKind::veb: return "veb";
    case PolicyKind::useb: return "useb";
    case PolicyKind::dseb: return "dseb";
  }
  return "unknown";
}

std::optional<PolicyKind> parse_policy_kind(std::string_view name) {
  if (name == "mle") return PolicyKind::mle;
  if (name == "veb") return PolicyKind::veb;
  if (name == "useb") return PolicyKind::useb;
  if (name == "dseb") return PolicyKind::dseb;
  return std::nullopt;
}

SmoothingVariant PolicyVariant::smoothing() const {
  switch (kind) {
    case PolicyKind::useb: return SmoothingVariant::uniform;
    case PolicyKind::dseb: return SmoothingVariant::discounted;
    case PolicyKind::mle:
    case PolicyKind::veb: return SmoothingVariant::last_only;
  }
  return SmoothingVariant::last_only;
}

namespace {

std::vector<PosteriorBelief> cold_start(std::size_t arms) {
  std::vector<PosteriorBelief> beliefs(arms);
  for (std::size_t k = 0; k < arms; ++k) beliefs[k].arm_id = static_cast<int>(k);
  return beliefs;
}

}  // namespace

std::vector<PosteriorBelief> update_beliefs(const PolicyVariant& variant, const BeliefInputs& inputs) {
  const auto arms = inputs.batches_by_arm.size();
  require(arms >= 1, "update_beliefs: no arms");

  std::vector<CumulativeEstimate> cumulative;
  cumulative.reserve(arms);
  bool any_data = false;
  for (const auto& batches : inputs.batches_by_arm) {
    if (batches.empty()) {
      cumulative.push_back({});
      continue;
    }
    cumulative.push_back(accumulate(batches, inputs.basis));
    any_data = any_data || cumulative.back().has_data;
  }
  if (!any_data) return cold_start(arms);

  auto beliefs = cold_start(arms);
  if (variant.kind == PolicyKind::mle) {
    for (std::size_t k = 0; k < arms; ++k) {
      if (!cumulative[k].has_data) continue;
      beliefs[k].mean = cumulative[k].mean;
      beliefs[k].var = std::max(cumulative[k].se2, kVarianceFloor);
    }
    return beliefs;
  }

  if (inputs.shrunk_history.empty()) return cold_start(arms);
  const SmoothingScheme scheme{variant.smoothing(), inputs.window_length};
  std::vector<ShrunkEstimate> column;
  for (std::size_t k = 0; k < arms; ++k) {
    column.clear();
    for (const auto& update : inputs.shrunk_history) {
      require(update.size() == arms, "update_beliefs: shrunk history arm count mismatch");
      column.push_back(update[k]);
    }
    const auto s = smooth(column, scheme);
    beliefs[k].mean = s.mean;
    beliefs[k].var = s.var;
  }
  return beliefs;
}

AllocationPlan sample_allocation(std::span<const PosteriorBelief> beliefs, std::int64_t batch_size, Rng& rng,
                                 int update_index) {
  require(!beliefs.empty(), "sample_allocation: no arms");
  require(batch_size >= 0, "sample_allocation: negative batch size");

  AllocationPlan plan{update_index, std::vector<std::int64_t>(beliefs.size(), 0)};
  std::vector<double> sd(beliefs.size());
  for (std::size_t k = 0; k < beliefs.size(); ++k) {
    require(beliefs[k].var >= 0.0, "sample_allocation: negative variance");
    sd[k] = std::sqrt(beliefs[k].var);  // zero variance is a point mass; exact ties go to the lowest arm
  }

  std::normal_distribution<double> normal(0.0, 1.0);
  for (std::int64_t unit = 0; unit < batch_size; ++unit) {
    std::size_t best = 0;
    double best_draw = beliefs[0].mean + sd[0] * normal(rng);
    for (std::size_t k = 1; k < beliefs.size(); ++k) {
      const double draw = beliefs[k].mean + sd[k] * normal(rng);
      if (draw > best_draw) {
        best_draw = draw;
        best = k;
      }
    }
    ++plan.counts[best];
  }
  return plan;
}

}  // namespace smoothbandit
