#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "smoothbandit/estimation.hpp"
#include "smoothbandit/random.hpp"

namespace smoothbandit {

enum class PolicyKind { mle, veb, useb, dseb };

std::string_view to_string(PolicyKind kind);
std::optional<PolicyKind> parse_policy_kind(std::string_view name);

/// Estimator variant driving Thompson sampling. The smoothing variant is
/// fixed by the kind; mle skips shrinkage altogether.
struct PolicyVariant {
  PolicyKind kind = PolicyKind::mle;

  SmoothingVariant smoothing() const;
};

struct PosteriorBelief {
  int arm_id = 0;
  double mean = 0.5;
  double var = 0.25;
};

struct AllocationPlan {
  int update_index = 1;
  std::vector<std::int64_t> counts;
};

/// Everything a policy may look at when forming beliefs. Both histories
/// cover the same active window.
struct BeliefInputs {
  /// [arm][update] batch statistics over the active window.
  std::span<const std::vector<BatchStats>> batches_by_arm;
  /// [update][arm] shrunk estimates, most recent update first.
  std::span<const std::vector<ShrunkEstimate>> shrunk_history;
  /// Window length handed to the smoothing scheme.
  int window_length = 1;
  MeanBasis basis = MeanBasis::responses;
};

/// Beliefs used for the next allocation. With no responses anywhere in the
/// window every arm gets the uninformative (0.5, 0.25).
std::vector<PosteriorBelief> update_beliefs(const PolicyVariant& variant, const BeliefInputs& inputs);

/// Per-unit Gaussian Thompson sampling: each unit draws one sample per arm
/// and goes to the argmax (lowest arm id on ties).
AllocationPlan sample_allocation(std::span<const PosteriorBelief> beliefs, std::int64_t batch_size, Rng& rng,
                                 int update_index = 1);

}  // namespace smoothbandit
