#include "smoothbandit/inference.hpp"

#include <algorithm>
#include <numbers>

#include "smoothbandit/errors.hpp"
#include "smoothbandit/quadrature.hpp"

namespace smoothbandit {

namespace {

constexpr double kLogSqrtTwoPi = 0.91893853320467274178;  // log(sqrt(2 pi))

double log_normal_pdf(double x, double mean, double sd) {
  const double z = (x - mean) / sd;
  return -0.5 * z * z - std::log(sd) - kLogSqrtTwoPi;
}

// Integration window half-width in posterior standard deviations; beyond it
// the integrand is below exp(-72) of its peak.
constexpr double kSpan = 12.0;

}  // namespace

double log10_bayes_factor(double d, double sigma, double mde, const EffectPrior& h1,
                          const QuadratureOptions& options) {
  require(std::isfinite(d) && std::isfinite(sigma) && std::isfinite(mde), "bayes factor: non-finite input");
  require(sigma > 0.0, "bayes factor: sampling sd must be > 0");
  require(mde > 0.0, "bayes factor: mde must be > 0");
  require(h1.scale > 0.0 && std::isfinite(h1.location), "bayes factor: bad H1 prior");

  const double null_sd = std::sqrt(sigma * sigma + 0.25 * mde * mde);
  const double log_h0 = log_normal_pdf(d, 0.0, null_sd);

  // The integrand is a product of two Gaussians in the effect size; centre
  // the window on the (possibly truncated) peak and rescale by its value so
  // that nothing underflows.
  const double s2 = h1.scale * h1.scale;
  const double v2 = sigma * sigma;
  double peak = (d * s2 + h1.location * v2) / (s2 + v2);
  const double width = sigma * h1.scale / std::sqrt(s2 + v2);
  if (h1.half) peak = std::max(peak, h1.location);

  const double log_prior_norm = h1.half ? std::log(2.0) : 0.0;
  auto log_integrand = [&](double effect) {
    return log_normal_pdf(d, effect, sigma) + log_prior_norm + log_normal_pdf(effect, h1.location, h1.scale);
  };
  const double log_peak = log_integrand(peak);
  auto integrand = [&](double effect) { return std::exp(log_integrand(effect) - log_peak); };

  double lo = peak - kSpan * width;
  double hi = peak + kSpan * width;
  if (h1.half && peak - kSpan * width < h1.location) {
    lo = h1.location;
    // Peak clipped by the truncation: the integrand falls off from the
    // boundary at least as fast as exp(-slope * x).
    const double mode = (d * s2 + h1.location * v2) / (s2 + v2);
    const double slope = (h1.location - mode) / (width * width);
    if (slope > 0.0) hi = std::min(hi, lo + 0.5 * kSpan * kSpan / slope);
  }

  double area = 0.0;
  if (lo < peak) area += quadrature::integrate(integrand, lo, peak, options.relative_tolerance).value;
  area += quadrature::integrate(integrand, peak, hi, options.relative_tolerance).value;

  const double log_h1 = log_peak + std::log(area);
  const double result = (log_h1 - log_h0) / std::numbers::ln10;
  return std::clamp(result, -kBayesFactorClamp, kBayesFactorClamp);
}

double bayes_factor(const SmoothedEstimate& e1, const SmoothedEstimate& e2, const HypothesisPair& pair) {
  require(std::isfinite(e1.mean) && std::isfinite(e2.mean) && std::isfinite(e1.var) && std::isfinite(e2.var),
          "bayes factor: non-finite estimate");
  const double d = std::abs(e1.mean - e2.mean);
  const double sigma = std::sqrt(std::max(e1.var, kVarianceFloor) + std::max(e2.var, kVarianceFloor));
  return log10_bayes_factor(d, sigma, pair.mde, EffectPrior::at_least_mde(pair.mde));
}

void step_decision(BayesFactorTrace& trace, const DecisionRule& rule, double log10_bf) {
  trace.log10_bf.push_back(log10_bf);
  if (!trace.decided_at && log10_bf >= rule.log10_threshold)
    trace.decided_at = static_cast<int>(trace.log10_bf.size());
}

namespace {

template <class Range, class Decided, class Delta>
RateSummary score(const Range& items, double mde, Decided decided, Delta delta) {
  RateSummary out;
  std::size_t tp = 0;
  std::size_t fp = 0;
  for (const auto& item : items) {
    if (delta(item) >= mde) {
      ++out.positives;
      tp += decided(item) ? 1 : 0;
    } else {
      ++out.negatives;
      fp += decided(item) ? 1 : 0;
    }
  }
  if (out.positives > 0) out.tpr = static_cast<double>(tp) / static_cast<double>(out.positives);
  if (out.negatives > 0) out.fpr = static_cast<double>(fp) / static_cast<double>(out.negatives);
  return out;
}

}  // namespace

RateSummary score_rates(std::span<const BayesFactorTrace> traces, double mde) {
  return score(
      traces, mde, [](const BayesFactorTrace& t) { return t.decided(); },
      [](const BayesFactorTrace& t) { return t.truth_delta; });
}

RateSummary score_rates(std::span<const DecisionRecord> records, double mde) {
  return score(
      records, mde, [](const DecisionRecord& r) { return r.decided; },
      [](const DecisionRecord& r) { return r.truth_delta; });
}

}  // namespace smoothbandit
