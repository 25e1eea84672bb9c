#pragma once

// Sequential Bayes factors between arm pairs, computed from smoothed
// estimates, with a one-directional early-stopping decision rule and
// true/false positive scoring against ground truth.

#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "smoothbandit/estimation.hpp"

namespace smoothbandit {

struct HypothesisPair {
  int arm_hi = 0;
  int arm_lo = 1;
  double mde = 0.01;
};

/// Prior over the effect size under H1. `half` restricts it to
/// [location, inf) with the given scale (a shifted half-normal); otherwise
/// it is a full normal centred on `location`.
struct EffectPrior {
  double location = 0.0;
  double scale = 1.0;
  bool half = true;

  /// Half-normal on effects >= mde with scale mde.
  static EffectPrior at_least_mde(double mde) { return {mde, mde, true}; }
};

struct QuadratureOptions {
  double relative_tolerance = 1e-8;
};

/// log10 p(d | H1) / p(d | H0) for an observed absolute difference `d` with
/// sampling standard deviation `sigma`. H0 is a normal noise prior of scale
/// mde/2 at zero; H1 is `h1` integrated numerically. Clamped to +/-12.
double log10_bayes_factor(double d, double sigma, double mde, const EffectPrior& h1,
                          const QuadratureOptions& options = {});

/// Bayes factor for two arms' smoothed estimates from the same update.
/// Throws ContractViolation on non-finite inputs.
double bayes_factor(const SmoothedEstimate& e1, const SmoothedEstimate& e2, const HypothesisPair& pair);

inline constexpr double kBayesFactorClamp = 12.0;

struct DecisionRule {
  double log10_threshold = std::log10(19.0);
};

struct BayesFactorTrace {
  HypothesisPair pair;
  std::vector<double> log10_bf;
  std::optional<int> decided_at;  // 1-based index into log10_bf of the first crossing
  double truth_delta = 0.0;

  bool decided() const { return decided_at.has_value(); }
};

/// Appends a value; the first value at or above the threshold decides H1
/// for good.
void step_decision(BayesFactorTrace& trace, const DecisionRule& rule, double log10_bf);

struct RateSummary {
  std::optional<double> tpr;  // empty when there are no positives
  std::optional<double> fpr;  // empty when there are no negatives
  std::size_t positives = 0;
  std::size_t negatives = 0;
};

/// Pairs with truth_delta >= mde are positives, the rest negatives.
RateSummary score_rates(std::span<const BayesFactorTrace> traces, double mde);

/// Same scoring over plain (decided, truth_delta) records.
struct DecisionRecord {
  bool decided = false;
  double truth_delta = 0.0;
};
RateSummary score_rates(std::span<const DecisionRecord> records, double mde);

}  // namespace smoothbandit
