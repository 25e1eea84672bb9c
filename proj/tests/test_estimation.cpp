#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <random>

#include "smoothbandit/errors.hpp"
#include "smoothbandit/estimation.hpp"

using namespace smoothbandit;

namespace {

BatchStats batch(std::int64_t sum, std::int64_t count, std::int64_t allocated = 0, int arm = 0) {
  return {arm, 1, allocated, sum, count};
}

CumulativeEstimate cum(int arm, double mean, double se2) { return {arm, true, mean, se2, 100, 100}; }

}  // namespace

TEST(Accumulate, SingleBatchIsBatchMean) {
  const BatchStats b[] = {batch(10, 100, 100)};
  const auto c = accumulate(b);
  ASSERT_TRUE(c.has_data);
  EXPECT_DOUBLE_EQ(c.mean, 0.10);
  EXPECT_NEAR(c.se2, 9e-4, 1e-15);
  EXPECT_EQ(c.total_responses, 100);
  EXPECT_EQ(c.total_allocated, 100);
}

TEST(Accumulate, PooledMean) {
  const BatchStats b[] = {batch(10, 100), batch(60, 300)};
  EXPECT_DOUBLE_EQ(accumulate(b).mean, 0.175);
}

TEST(Accumulate, NoResponsesIsFlagged) {
  const BatchStats b[] = {batch(0, 0, 50), batch(0, 0, 20)};
  const auto c = accumulate(b);
  EXPECT_FALSE(c.has_data);
  EXPECT_EQ(c.total_allocated, 70);
}

TEST(Accumulate, MixedArmsRejected) {
  const BatchStats b[] = {batch(1, 2, 0, 0), batch(1, 2, 0, 1)};
  EXPECT_THROW(accumulate(b), ContractViolation);
  EXPECT_THROW(accumulate(std::span<const BatchStats>{}), ContractViolation);
}

TEST(Accumulate, AllocationBasisDividesByUnits) {
  // 40 successes delivered, 500 units allocated: in-flight responses count as misses.
  const BatchStats b[] = {batch(10, 100, 300), batch(30, 150, 200)};
  const auto c = accumulate(b, MeanBasis::allocations);
  EXPECT_DOUBLE_EQ(c.mean, 40.0 / 500.0);
  EXPECT_NEAR(c.se2, 0.08 * 0.92 / 500.0, 1e-16);
}

TEST(Accumulate, AllocationBasisCapsSpillover) {
  // Old responses arriving into a window with few allocations.
  const BatchStats b[] = {batch(8, 8, 5)};
  const auto c = accumulate(b, MeanBasis::allocations);
  EXPECT_DOUBLE_EQ(c.mean, 1.0);
  const BatchStats none[] = {batch(3, 9, 0)};
  EXPECT_FALSE(accumulate(none, MeanBasis::allocations).has_data);
}

TEST(Accumulate, ZeroSuccessVarianceUsesHalfCount) {
  const BatchStats b[] = {batch(0, 200)};
  const auto c = accumulate(b);
  EXPECT_DOUBLE_EQ(c.mean, 0.0);
  const double q = 0.5 / 200.0;
  EXPECT_DOUBLE_EQ(c.se2, q * (1 - q) / 200.0);
}

TEST(AccumulateProperty, PooledMeanMatchesFlatResponses) {
  std::mt19937_64 rng(11);
  for (int rep = 0; rep < 200; ++rep) {
    std::uniform_int_distribution<int> nb(1, 6), cnt(0, 40);
    std::vector<BatchStats> batches;
    std::vector<int> flat;  // every individual response in the window
    std::int64_t allocated = 0;
    for (int i = 0, n = nb(rng); i < n; ++i) {
      const int c = cnt(rng);
      std::int64_t s = 0;
      for (int j = 0; j < c; ++j) {
        const int y = std::bernoulli_distribution(0.3)(rng) ? 1 : 0;
        flat.push_back(y);
        s += y;
      }
      const int a = cnt(rng);
      allocated += a;
      batches.push_back({0, i + 1, a, s, c});
    }
    const auto e = accumulate(batches);
    ASSERT_EQ(e.has_data, !flat.empty());
    if (flat.empty()) continue;
    const double oracle = std::accumulate(flat.begin(), flat.end(), 0.0) / static_cast<double>(flat.size());
    EXPECT_NEAR(e.mean, oracle, 1e-15);
    EXPECT_GE(e.se2, 0.0);
    EXPECT_LE(e.se2, 0.25);
    EXPECT_EQ(e.total_allocated, allocated);
  }
}

TEST(AccumulateProperty, VarianceNonIncreasingInCount) {
  double last = 1.0;
  for (int n = 10; n <= 10000; n *= 10) {
    const BatchStats b[] = {batch(n / 10, n)};
    const auto e = accumulate(b);
    EXPECT_LT(e.se2, last);
    last = e.se2;
  }
}

TEST(Shrink, HandExample) {
  const CumulativeEstimate c[] = {cum(0, 0.10, 4e-4), cum(1, 0.12, 4e-4), cum(2, 0.14, 4e-4), cum(3, 0.20, 4e-4)};
  const auto r = shrink(c);
  EXPECT_NEAR(r.context.grand_mean, 0.14, 1e-15);
  EXPECT_NEAR(r.context.dispersion, 0.0056, 1e-15);
  EXPECT_EQ(r.context.arm_count, 4);
  EXPECT_NEAR(r.estimates[0].shrinkage, 0.0714285714285714, 1e-12);
  EXPECT_NEAR(r.estimates[0].js_mean, 0.102857142857143, 1e-12);
}

TEST(Shrink, EqualMeansShrinkFully) {
  const CumulativeEstimate c[] = {cum(0, 0.2, 1e-3), cum(1, 0.2, 2e-3), cum(2, 0.2, 1e-3), cum(3, 0.2, 5e-4)};
  for (const auto& e : shrink(c).estimates) {
    EXPECT_DOUBLE_EQ(e.shrinkage, 1.0);
    EXPECT_DOUBLE_EQ(e.js_mean, 0.2);
  }
}

TEST(Shrink, ZeroNoiseRecoversMle) {
  const CumulativeEstimate c[] = {cum(0, 0.1, 0), cum(1, 0.3, 0), cum(2, 0.2, 0), cum(3, 0.5, 0), cum(4, 0.4, 0)};
  const auto r = shrink(c);
  for (std::size_t k = 0; k < 5; ++k) {
    EXPECT_DOUBLE_EQ(r.estimates[k].shrinkage, 0.0);
    EXPECT_DOUBLE_EQ(r.estimates[k].js_mean, c[k].mean);
  }
}

TEST(Shrink, FewArmsDisableShrinkage) {
  const CumulativeEstimate c[] = {cum(0, 0.1, 1e-2), cum(1, 0.3, 1e-2), cum(2, 0.2, 1e-2)};
  const auto r = shrink(c);
  EXPECT_FALSE(r.context.shrinkage_enabled);
  for (std::size_t k = 0; k < 3; ++k) {
    EXPECT_EQ(r.estimates[k].shrinkage, 0.0);
    EXPECT_EQ(r.estimates[k].js_mean, c[k].mean);
    EXPECT_EQ(r.estimates[k].js_var, c[k].se2);
  }
}

TEST(Shrink, NoDataArmsTakeGrandMeanAndWidestVariance) {
  const CumulativeEstimate c[] = {cum(0, 0.1, 1e-3), {1, false, 0, 0, 0, 10}, cum(2, 0.3, 4e-3), cum(3, 0.2, 2e-3),
                                  cum(4, 0.4, 1e-3)};
  const auto r = shrink(c);
  EXPECT_EQ(r.context.arm_count, 4);
  EXPECT_NEAR(r.estimates[1].js_mean, 0.25, 1e-15);
  double widest = 0.0;
  for (std::size_t k : {0u, 2u, 3u, 4u}) widest = std::max(widest, r.estimates[k].js_var);
  EXPECT_EQ(r.estimates[1].js_var, widest);
}

TEST(Shrink, NoDataAnywhereIsUninformative) {
  const CumulativeEstimate c[] = {{0, false, 0, 0, 0, 0}, {1, false, 0, 0, 0, 0}};
  for (const auto& e : shrink(c).estimates) {
    EXPECT_EQ(e.js_mean, 0.5);
    EXPECT_EQ(e.js_var, 0.25);
  }
}

TEST(ShrinkProperty, ContractionAndPositivePart) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> mean(0.0, 0.2), var(0.0, 5e-3);
  std::uniform_int_distribution<int> arms(1, 20);
  for (int rep = 0; rep < 500; ++rep) {
    std::vector<CumulativeEstimate> c;
    const int k = arms(rng);
    for (int i = 0; i < k; ++i) c.push_back(cum(i, mean(rng), rep % 7 == 0 ? 0.0 : var(rng)));
    if (rep % 11 == 0)
      for (auto& e : c) e.mean = 0.05;  // s2 = 0
    const auto r = shrink(c);
    for (std::size_t i = 0; i < c.size(); ++i) {
      const auto& e = r.estimates[i];
      ASSERT_GE(e.shrinkage, 0.0);
      ASSERT_LE(e.shrinkage, 1.0);
      ASSERT_GE(e.js_var, kVarianceFloor);
      const double before = std::abs(c[i].mean - r.context.grand_mean);
      const double after = std::abs(e.js_mean - r.context.grand_mean);
      ASSERT_LE(after, before + 1e-15);
      if (e.shrinkage == 0.0) ASSERT_EQ(e.js_mean, c[i].mean);
    }
  }
}

TEST(ShrinkProperty, PermutationEquivariant) {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> mean(0.0, 0.2), var(1e-5, 5e-3);
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<CumulativeEstimate> c;
    for (int i = 0; i < 15; ++i) c.push_back(cum(i, mean(rng), var(rng)));
    std::vector<int> perm(15);
    std::iota(perm.begin(), perm.end(), 0);
    std::shuffle(perm.begin(), perm.end(), rng);
    std::vector<CumulativeEstimate> p;
    for (int i : perm) p.push_back(c[static_cast<std::size_t>(i)]);
    const auto a = shrink(c), b = shrink(p);
    for (std::size_t i = 0; i < 15; ++i) {
      const auto& x = a.estimates[static_cast<std::size_t>(perm[i])];
      const auto& y = b.estimates[i];
      EXPECT_NEAR(x.js_mean, y.js_mean, 1e-14);
      EXPECT_NEAR(x.js_var, y.js_var, 1e-14);
    }
  }
}

TEST(ShrinkProperty, MleLimit) {
  const double means[] = {0.02, 0.05, 0.08, 0.11, 0.14};
  double last = 1.0;
  for (double scale : {1e-3, 1e-5, 1e-7, 1e-9}) {
    std::vector<CumulativeEstimate> c;
    for (int i = 0; i < 5; ++i) c.push_back(cum(i, means[i], scale));
    const auto r = shrink(c);
    EXPECT_LT(r.estimates[0].shrinkage, last);
    last = r.estimates[0].shrinkage;
    if (scale == 1e-9) EXPECT_NEAR(r.estimates[0].js_mean, means[0], 1e-7);
  }
}

TEST(Weights, Examples) {
  EXPECT_EQ(weights({SmoothingVariant::last_only, 5}, 5), (std::vector<double>{1, 0, 0, 0, 0}));
  EXPECT_EQ(weights({SmoothingVariant::uniform, 4}, 4), (std::vector<double>{0.25, 0.25, 0.25, 0.25}));
  const auto d = weights({SmoothingVariant::discounted, 3}, 3);
  EXPECT_NEAR(d[0], 0.5, 1e-15);
  EXPECT_NEAR(d[1], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[2], 1.0 / 6.0, 1e-15);
  EXPECT_THROW(weights({SmoothingVariant::uniform, 4}, 0), ContractViolation);
}

TEST(WeightsProperty, NormalizedNonNegativeAndTapering) {
  for (auto v : {SmoothingVariant::last_only, SmoothingVariant::uniform, SmoothingVariant::discounted}) {
    for (int u = 1; u <= 60; ++u) {
      for (int m = 1; m <= u; ++m) {
        const auto w = weights({v, u}, m);
        ASSERT_EQ(static_cast<int>(w.size()), m);
        ASSERT_NEAR(std::accumulate(w.begin(), w.end(), 0.0), 1.0, 1e-12);
        for (std::size_t i = 0; i < w.size(); ++i) {
          ASSERT_GE(w[i], 0.0);
          if (v == SmoothingVariant::discounted && i > 0) ASSERT_LE(w[i], w[i - 1]);
        }
      }
    }
  }
}

TEST(Smooth, Examples) {
  auto h = [](std::initializer_list<double> means) {
    std::vector<ShrunkEstimate> out;
    for (double m : means) out.push_back({0, 1, m, 1e-4, 0.1});
    return out;
  };
  const auto two = h({0.2, 0.1});
  EXPECT_NEAR(smooth(two, {SmoothingVariant::uniform, 2}).mean, 0.15, 1e-15);
  const auto three = h({0.3, 0.2, 0.1});
  EXPECT_NEAR(smooth(three, {SmoothingVariant::discounted, 3}).mean, 0.233333333333333, 1e-12);
  const auto last = smooth(three, {SmoothingVariant::last_only, 3});
  EXPECT_EQ(last.mean, 0.3);
  EXPECT_EQ(last.var, 1e-4);
  EXPECT_THROW(smooth(std::span<const ShrunkEstimate>{}, {SmoothingVariant::uniform, 1}), ContractViolation);
}

TEST(SmoothProperty, SingleWindowIdentity) {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 1000; ++rep) {
    const ShrunkEstimate e{rep % 15, 7, u(rng), u(rng) * 0.01 + 1e-9, u(rng)};
    for (auto v : {SmoothingVariant::last_only, SmoothingVariant::uniform, SmoothingVariant::discounted}) {
      const auto s = smooth(std::span(&e, 1), {v, 1});
      ASSERT_EQ(s.mean, e.js_mean);
      ASSERT_EQ(s.var, e.js_var);
    }
  }
}
