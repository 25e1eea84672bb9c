#include <gtest/gtest.h>

#include <numeric>

#include "smoothbandit/policy.hpp"

using namespace smoothbandit;

namespace {

std::vector<std::vector<BatchStats>> one_batch_each(std::initializer_list<std::pair<int, int>> sum_count) {
  std::vector<std::vector<BatchStats>> out;
  int k = 0;
  for (auto [s, c] : sum_count) out.push_back({{k++, 1, c, s, c}});
  return out;
}

}  // namespace

TEST(PolicyVariant, SchemeFollowsKind) {
  EXPECT_EQ(PolicyVariant{PolicyKind::mle}.smoothing(), SmoothingVariant::last_only);
  EXPECT_EQ(PolicyVariant{PolicyKind::veb}.smoothing(), SmoothingVariant::last_only);
  EXPECT_EQ(PolicyVariant{PolicyKind::useb}.smoothing(), SmoothingVariant::uniform);
  EXPECT_EQ(PolicyVariant{PolicyKind::dseb}.smoothing(), SmoothingVariant::discounted);
  for (auto k : {PolicyKind::mle, PolicyKind::veb, PolicyKind::useb, PolicyKind::dseb})
    EXPECT_EQ(parse_policy_kind(to_string(k)), k);
  EXPECT_FALSE(parse_policy_kind("ucb"));
}

TEST(UpdateBeliefs, MleIsPooledMean) {
  const auto batches = one_batch_each({{10, 100}});
  const auto b = update_beliefs({PolicyKind::mle}, {batches, {}, 1});
  EXPECT_DOUBLE_EQ(b[0].mean, 0.10);
}

TEST(UpdateBeliefs, ColdStart) {
  const auto batches = one_batch_each({{0, 0}, {0, 0}, {0, 0}});
  for (auto k : {PolicyKind::mle, PolicyKind::veb, PolicyKind::useb, PolicyKind::dseb}) {
    for (const auto& b : update_beliefs({k}, {batches, {}, 1})) {
      EXPECT_EQ(b.mean, 0.5);
      EXPECT_EQ(b.var, 0.25);
    }
  }
}

TEST(UpdateBeliefs, SmoothedVariants) {
  std::vector<std::vector<BatchStats>> batches{{{0, 1, 10, 1, 10}}};
  std::vector<std::vector<ShrunkEstimate>> history{{{0, 3, 0.3, 1e-4, 0}}, {{0, 2, 0.2, 1e-4, 0}}, {{0, 1, 0.1, 1e-4, 0}}};
  EXPECT_NEAR(update_beliefs({PolicyKind::dseb}, {batches, history, 3})[0].mean, 0.233333333333333, 1e-12);
  EXPECT_NEAR(update_beliefs({PolicyKind::useb}, {batches, history, 3})[0].mean, 0.2, 1e-15);
  EXPECT_EQ(update_beliefs({PolicyKind::veb}, {batches, history, 3})[0].mean, 0.3);
}

TEST(UpdateBeliefs, UsebWithUnitWindowEqualsVeb) {
  std::vector<std::vector<BatchStats>> batches{{{0, 1, 10, 1, 10}}, {{1, 1, 10, 4, 10}}};
  std::vector<std::vector<ShrunkEstimate>> history{{{0, 1, 0.13, 2e-4, 0.2}, {1, 1, 0.37, 3e-4, 0.2}}};
  const auto a = update_beliefs({PolicyKind::useb}, {batches, history, 1});
  const auto b = update_beliefs({PolicyKind::veb}, {batches, history, 1});
  for (std::size_t k = 0; k < 2; ++k) {
    EXPECT_EQ(a[k].mean, b[k].mean);
    EXPECT_EQ(a[k].var, b[k].var);
  }
}

TEST(UpdateBeliefsProperty, VariantsAgreeWithoutShrinkageOrHistory) {
  // K <= 3 disables shrinkage; a one-update window removes smoothing.
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> count(1, 200);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<CumulativeEstimate> cum;
    std::vector<std::vector<BatchStats>> batches;
    for (int k = 0; k < 3; ++k) {
      const int c = count(rng);
      const int s = std::uniform_int_distribution<int>(0, c)(rng);
      batches.push_back({{k, 1, c, s, c}});
      cum.push_back(accumulate(batches.back()));
    }
    const auto shrunk = shrink(cum);
    std::vector<std::vector<ShrunkEstimate>> history{shrunk.estimates};
    const auto ref = update_beliefs({PolicyKind::mle}, {batches, history, 1});
    for (auto kind : {PolicyKind::veb, PolicyKind::useb, PolicyKind::dseb}) {
      const auto b = update_beliefs({kind}, {batches, history, 1});
      for (std::size_t k = 0; k < 3; ++k) {
        ASSERT_EQ(b[k].mean, ref[k].mean);
        ASSERT_EQ(b[k].var, ref[k].var);
      }
    }
  }
}

TEST(SampleAllocation, EmptyBatch) {
  Rng rng(1);
  const std::vector<PosteriorBelief> b(3);
  const auto plan = sample_allocation(b, 0, rng);
  EXPECT_EQ(plan.counts, (std::vector<std::int64_t>{0, 0, 0}));
}

TEST(SampleAllocation, DegenerateVariancesPickArgmax) {
  Rng rng(1);
  const std::vector<PosteriorBelief> b{{0, 0.9, 1e-12}, {1, 0.1, 1e-12}};
  EXPECT_EQ(sample_allocation(b, 1000, rng).counts, (std::vector<std::int64_t>{1000, 0}));
}

TEST(SampleAllocation, TiesGoToLowestArm) {
  Rng rng(1);
  const std::vector<PosteriorBelief> b{{0, 0.5, 0.0}, {1, 0.5, 0.0}, {2, 0.5, 0.0}};
  EXPECT_EQ(sample_allocation(b, 50, rng).counts, (std::vector<std::int64_t>{50, 0, 0}));
}

TEST(SampleAllocation, SymmetricBeliefsSplitEvenly) {
  Rng rng(42);
  const std::vector<PosteriorBelief> b{{0, 0.1, 0.01}, {1, 0.1, 0.01}, {2, 0.1, 0.01}, {3, 0.1, 0.01}};
  const auto plan = sample_allocation(b, 10000, rng);
  double chi2 = 0.0;
  for (auto c : plan.counts) chi2 += (c - 2500.0) * (c - 2500.0) / 2500.0;
  EXPECT_LT(chi2, 11.345);  // chi-square 99% quantile, 3 degrees of freedom
}

TEST(SampleAllocationProperty, ConservationAndDeterminism) {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> m(0.0, 0.3), v(1e-6, 1e-2);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<PosteriorBelief> b;
    for (int k = 0; k < 1 + rep % 15; ++k) b.push_back({k, m(gen), v(gen)});
    const auto n = static_cast<std::int64_t>(rep * 17);
    Rng r1(static_cast<std::uint64_t>(rep)), r2(static_cast<std::uint64_t>(rep));
    const auto p1 = sample_allocation(b, n, r1), p2 = sample_allocation(b, n, r2);
    ASSERT_EQ(std::accumulate(p1.counts.begin(), p1.counts.end(), std::int64_t{0}), n);
    ASSERT_EQ(p1.counts, p2.counts);
  }
}

TEST(SampleAllocationProperty, RaisingMeanNeverLowersShare) {
  const int n = 100000;
  double last = -1.0;
  for (double mean : {0.05, 0.08, 0.10, 0.12, 0.15}) {
    Rng rng(77);
    const std::vector<PosteriorBelief> b{{0, mean, 1e-3}, {1, 0.1, 1e-3}, {2, 0.1, 2e-3}};
    const double share = static_cast<double>(sample_allocation(b, n, rng).counts[0]) / n;
    const double sd = std::sqrt(0.25 / n);
    EXPECT_GE(share, last - 3 * sd);
    last = share;
  }
}
