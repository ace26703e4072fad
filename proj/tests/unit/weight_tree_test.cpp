#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numeric>
#include <vector>

#include "adasamp/rng.hpp"
#include "adasamp/sampler_check.hpp"
#include "adasamp/weight_tree.hpp"
#include "oracles.hpp"

using adasamp::Rng;
using adasamp::WeightTree;

namespace {

std::vector<double> random_weights(std::size_t n, Rng& rng) {
  std::vector<double> w(n);
  for (auto& x : w) x = rng.uniform();
  return w;
}

// Recomputes every internal label from the leaves.
double max_label_error(const WeightTree& t) {
  const auto labels = t.labels();
  std::vector<double> fresh(labels.begin(), labels.end());
  for (std::size_t k = t.capacity() - 1; k >= 1; --k) fresh[k] = fresh[2 * k] + fresh[2 * k + 1];
  double worst = 0.0;
  for (std::size_t k = 1; k < t.capacity(); ++k) worst = std::max(worst, std::abs(fresh[k] - labels[k]));
  return worst;
}

}  // namespace

TEST(WeightTree, EqualWeightsGiveEqualProbabilities) {
  const std::vector<double> w{1, 1, 1, 1};
  WeightTree t(w);
  for (std::size_t i = 0; i < 4; ++i) EXPECT_DOUBLE_EQ(t.prob(i), 0.25);
  const auto d = t.distribution();
  for (double p : d) EXPECT_DOUBLE_EQ(p, 0.25);
}

TEST(WeightTree, ProportionalProbabilities) {
  const std::vector<double> w{1, 3};
  WeightTree t(w);
  EXPECT_DOUBLE_EQ(t.prob(0), 0.25);
  EXPECT_DOUBLE_EQ(t.prob(1), 0.75);
  const auto d = t.distribution();
  EXPECT_DOUBLE_EQ(d[0], 0.25);
  EXPECT_DOUBLE_EQ(d[1], 0.75);

  const std::vector<double> even{2, 2};
  EXPECT_DOUBLE_EQ(WeightTree(even).prob(0), 0.5);
  const std::vector<double> one_zero{1, 0};
  EXPECT_EQ(WeightTree(one_zero).prob(1), 0.0);
}

TEST(WeightTree, DepthIsCeilLog2) {
  EXPECT_EQ(WeightTree::uniform(50000).depth(), 16u);
  EXPECT_EQ(WeightTree::uniform(1).depth(), 0u);
  EXPECT_EQ(WeightTree::uniform(2).depth(), 1u);
  EXPECT_EQ(WeightTree::uniform(7).depth(), 3u);
  EXPECT_EQ(WeightTree::uniform(7).capacity(), 8u);
  EXPECT_EQ(WeightTree::uniform(64).depth(), 6u);
  EXPECT_EQ(WeightTree::uniform(65).depth(), 7u);
  EXPECT_EQ(adasamp::ceil_log2(1000), 10u);
}

TEST(WeightTree, RejectsInvalidWeights) {
  EXPECT_THROW(WeightTree(std::vector<double>{}), std::invalid_argument);
  EXPECT_THROW(WeightTree(std::vector<double>{0, 0, 0}), std::invalid_argument);
  EXPECT_THROW(WeightTree(std::vector<double>{1, -1}), std::invalid_argument);
  EXPECT_THROW(WeightTree(std::vector<double>{1, std::numeric_limits<double>::infinity()}),
               std::invalid_argument);
  EXPECT_THROW(WeightTree(std::vector<double>{1, std::nan("")}), std::invalid_argument);
}

TEST(WeightTree, SingleNonzeroLeafIsAlwaysDrawn) {
  WeightTree t(std::vector<double>{0, 1, 0});
  Rng rng(3);
  for (int k = 0; k < 10000; ++k) ASSERT_EQ(t.sample(rng), 1u);
}

TEST(WeightTree, ForcedLeftBranch) {
  WeightTree t(std::vector<double>{1, 1});
  EXPECT_EQ(t.sample([] { return 0.0; }), 0u);
  EXPECT_EQ(t.sample([] { return 0.4999; }), 0u);
  EXPECT_EQ(t.sample([] { return 0.5; }), 1u);
  EXPECT_EQ(t.sample([] { return 0.9999; }), 1u);
}

TEST(WeightTree, ConsumesOneUniformPerLevel) {
  for (std::size_t n : {1u, 2u, 3u, 7u, 8u, 1000u}) {
    const auto t = WeightTree::uniform(n);
    std::size_t calls = 0;
    t.sample([&] {
      ++calls;
      return 0.3;
    });
    EXPECT_EQ(calls, t.depth()) << "n=" << n;
  }
}

TEST(WeightTree, NeverDrawsZeroWeightOrPadding) {
  Rng rng(11);
  std::vector<double> w{0, 2, 0, 0, 5, 0, 1};
  WeightTree t(w);
  for (int k = 0; k < 20000; ++k) {
    const auto i = t.sample(rng);
    ASSERT_LT(i, w.size());
    ASSERT_GT(w[i], 0.0);
  }
  // Edge uniforms close to 1 must not fall into padding leaves.
  const double almost_one = std::nextafter(1.0, 0.0);
  EXPECT_LT(t.sample([&] { return almost_one; }), w.size());
  EXPECT_EQ(t.sample([&] { return almost_one; }), 6u);
}

TEST(WeightTree, GoodnessOfFitOnFixedWeights) {
  WeightTree t(std::vector<double>{1, 2, 3, 4});
  Rng rng(7);
  std::vector<std::size_t> counts(4, 0);
  for (int k = 0; k < 100000; ++k) ++counts[t.sample(rng)];
  const std::vector<double> p{0.1, 0.2, 0.3, 0.4};
  const auto fit = adasamp::chi_square_test(counts, p);
  EXPECT_EQ(fit.dof, 3u);
  EXPECT_GT(fit.p_value, 1e-3);
}

TEST(WeightTree, UpdateRenormalizes) {
  WeightTree t(std::vector<double>{1, 1, 1, 1});
  t.update(2, 0.0);
  const auto d = t.distribution();
  EXPECT_NEAR(d[0], 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(d[1], 1.0 / 3.0, 1e-15);
  EXPECT_EQ(d[2], 0.0);
  EXPECT_NEAR(d[3], 1.0 / 3.0, 1e-15);

  WeightTree two(std::vector<double>{1, 1});
  two.update(1, 3.0);
  EXPECT_DOUBLE_EQ(two.prob(1), 0.75);
}

TEST(WeightTree, IdentityUpdateKeepsDistribution) {
  Rng rng(5);
  const auto w = random_weights(37, rng);
  WeightTree t(w);
  const auto before = t.distribution();
  for (std::size_t i = 0; i < w.size(); ++i) t.update(i, t.weight(i));
  EXPECT_EQ(t.distribution(), before);
}

TEST(WeightTree, UpdateRejectsBadInput) {
  WeightTree t(std::vector<double>{1, 1, 1});
  EXPECT_THROW(t.update(3, 1.0), std::out_of_range);
  EXPECT_THROW(t.update(0, -1.0), std::invalid_argument);
  EXPECT_THROW(t.update(0, std::numeric_limits<double>::infinity()), std::invalid_argument);
  EXPECT_THROW(t.prob(3), std::out_of_range);
  EXPECT_THROW(t.weight(7), std::out_of_range);
}

TEST(WeightTree, ZeroTotalIsRejectedOnRead) {
  WeightTree t(std::vector<double>{1, 0});
  t.update(0, 0.0);
  Rng rng(1);
  EXPECT_THROW(t.sample(rng), std::domain_error);
  EXPECT_THROW(t.prob(0), std::domain_error);
  EXPECT_THROW(t.distribution(), std::domain_error);
  t.update(1, 2.0);
  EXPECT_EQ(t.sample(rng), 1u);
}

TEST(WeightTree, PaddingLeavesStayZero) {
  Rng rng(9);
  WeightTree t(random_weights(5, rng));
  for (int k = 0; k < 1000; ++k) t.update(rng.index(5), rng.uniform());
  const auto labels = t.labels();
  for (std::size_t leaf = 5; leaf < t.capacity(); ++leaf) EXPECT_EQ(labels[t.capacity() + leaf], 0.0);
}

TEST(WeightTree, ProbMatchesNaiveNormalization) {
  Rng rng(21);
  for (int rep = 0; rep < 200; ++rep) {
    const std::size_t n = 1 + rng.index(1024);
    const auto w = random_weights(n, rng);
    WeightTree t(w);
    const double s = std::accumulate(w.begin(), w.end(), 0.0);
    for (std::size_t i = 0; i < n; ++i) ASSERT_NEAR(t.prob(i), w[i] / s, 1e-12);
    const auto d = t.distribution();
    EXPECT_NEAR(std::accumulate(d.begin(), d.end(), 0.0), 1.0, 1e-12);
  }
}

// Product of branch probabilities along the path telescopes to w_i / W.
TEST(WeightTree, PathProbabilityTelescopes) {
  Rng rng(33);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t n = 1 + rng.index(300);
    WeightTree t(random_weights(n, rng));
    const auto labels = t.labels();
    for (std::size_t i = 0; i < n; ++i) {
      double p = 1.0;
      for (std::size_t node = t.capacity() + i; node > 1; node /= 2) {
        p *= labels[node] / labels[node / 2];
      }
      ASSERT_NEAR(p, t.prob(i), 1e-12);
    }
  }
}

TEST(WeightTree, TouchCounts) {
  for (std::size_t n : {1u, 2u, 7u, 64u, 1000u, 1u << 20}) {
    auto t = WeightTree::uniform(n);
    Rng rng(n);
    t.sample(rng);
    EXPECT_EQ(t.last_touch_count(), t.depth());
    t.update(n - 1, 2.0);
    EXPECT_EQ(t.last_touch_count(), t.depth() + 1);
  }
}

TEST(WeightTree, SumInvariantUnderManyUpdates) {
  Rng rng(44);
  const std::size_t n = 1000;
  WeightTree t(random_weights(n, rng));
  for (int k = 0; k < 200000; ++k) {
    t.update(rng.index(n), rng.uniform() * 100.0);
    if (k % 7 == 0) t.sample(rng);
  }
  EXPECT_LE(max_label_error(t), 1e-9 * t.total());
  EXPECT_LE(t.max_sum_deviation(), 1e-9 * t.total());
  t.rebuild();
  EXPECT_EQ(max_label_error(t), 0.0);
}

TEST(WeightTree, SamplesAgreeWithNaiveTraversal) {
  Rng wrng(55);
  for (std::size_t n : {1u, 2u, 3u, 5u, 16u, 17u, 100u}) {
    const auto w = random_weights(n, wrng);
    WeightTree t(w);
    oracle::NaiveSampler naive(w);
    Rng a(n), b(n);
    for (int k = 0; k < 2000; ++k) ASSERT_EQ(t.sample(a), naive.sample(b));
  }
}

TEST(WeightTree, VerifySamplerReport) {
  Rng rng(66);
  const auto w = random_weights(64, rng);
  const auto r = adasamp::verify_sampler(w, 50000, rng);
  EXPECT_EQ(r.n, 64u);
  EXPECT_EQ(r.depth, 6u);
  EXPECT_EQ(r.sample_touches, 6u);
  EXPECT_EQ(r.update_touches, 7u);
  EXPECT_LE(r.max_prob_error, 1e-12);
  EXPECT_GT(r.fit.p_value, 1e-3);
}

TEST(ChiSquare, DetectsWrongDistribution) {
  std::vector<std::size_t> counts{5000, 5000};
  const std::vector<double> p{0.25, 0.75};
  EXPECT_LT(adasamp::chi_square_test(counts, p).p_value, 1e-10);
  std::vector<std::size_t> impossible{1, 10};
  const std::vector<double> q{0.0, 1.0};
  EXPECT_EQ(adasamp::chi_square_test(impossible, q).p_value, 0.0);
  EXPECT_THROW(adasamp::chi_square_test(counts, std::span<const double>(q).first(1)), std::invalid_argument);
}

TEST(ChiSquare, PoolsSmallCells) {
  // 1000 cells with expected count 1 each pool into a single cell.
  std::vector<std::size_t> counts(1001, 1);
  counts[1000] = 9000;
  std::vector<double> p(1001, 1e-4);
  p[1000] = 0.9;
  const auto fit = adasamp::chi_square_test(counts, p);
  EXPECT_EQ(fit.dof, 1u);
  EXPECT_NEAR(fit.statistic, 0.0, 1e-9);
}
