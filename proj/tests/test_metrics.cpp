#include <algorithm>
#include <cmath>
#include <numeric>

#include <gtest/gtest.h>

#include "feasible/error.hpp"
#include "feasible/metrics.hpp"
#include "feasible/rng.hpp"

namespace {

using namespace feasible;

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

Eigen::VectorXd random_losses(std::uint64_t seed, Eigen::Index n) {
  CounterRng rng(seed, 0);
  Eigen::VectorXd g(n);
  for (Eigen::Index i = 0; i < n; ++i) g(i) = std::exp(rng.normal());
  return g;
}

double cdf_at(const std::vector<CdfPoint>& cdf, double x) {
  double f = 0.0;
  for (const auto& p : cdf)
    if (p.value <= x) f = p.fraction;
  return f;
}

TEST(EmpiricalCdf, Examples) {
  const auto cdf = empirical_cdf(vec({1, 2, 2, 5}));
  ASSERT_EQ(cdf.size(), 3u);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 1.0), 0.25);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 2.0), 0.75);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 4.9), 0.75);
  EXPECT_DOUBLE_EQ(cdf_at(cdf, 5.0), 1.0);

  const auto flat = empirical_cdf(Eigen::VectorXd::Constant(6, 0.3));
  ASSERT_EQ(flat.size(), 1u);
  EXPECT_DOUBLE_EQ(flat[0].value, 0.3);
  EXPECT_DOUBLE_EQ(flat[0].fraction, 1.0);
}

TEST(EmpiricalCdf, MonotoneAndEndsAtOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto cdf = empirical_cdf(random_losses(s, 37));
    for (std::size_t i = 1; i < cdf.size(); ++i) {
      EXPECT_LT(cdf[i - 1].value, cdf[i].value);
      EXPECT_LT(cdf[i - 1].fraction, cdf[i].fraction);
    }
    EXPECT_DOUBLE_EQ(cdf.back().fraction, 1.0);
  }
}

TEST(Cvar, Examples) {
  const auto g = vec({1, 2, 3, 4, 5, 6});
  EXPECT_EQ(quantile_rank(0.5, 6), 3);
  EXPECT_EQ(quantile_rank(0.0, 6), 1);
  EXPECT_DOUBLE_EQ(cvar(g, 0.5), 5.0);
  EXPECT_DOUBLE_EQ(cvar(vec({1, 2, 3, 4}), 0.5), 3.5);
  EXPECT_DOUBLE_EQ(cvar(vec({1, 2, 3, 4}), 0.0), 3.0);
  EXPECT_DOUBLE_EQ(cvar(vec({1, 2, 3, 4, 5}), 0.0), 3.5);
  EXPECT_DOUBLE_EQ(cvar(g, 0.99), 6.0);
  EXPECT_DOUBLE_EQ(cvar(Eigen::VectorXd::Constant(5, 2.0), 0.3), 2.0);
}

TEST(Cvar, MonotoneInQuantile) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_losses(s, 50);
    double previous = -1.0;
    for (int k = 0; k < 100; ++k) {
      const double c = cvar(g, k / 100.0);
      EXPECT_GE(c, previous - 1e-15);
      EXPECT_LE(c, g.maxCoeff());
      previous = c;
    }
  }
}

TEST(Cvar, PermutationInvariant) {
  const auto g = random_losses(3, 40);
  std::vector<int> order(40);
  std::iota(order.begin(), order.end(), 0);
  CounterRng rng(7, 0);
  for (int i = 39; i > 0; --i) std::swap(order[i], order[rng.below(static_cast<std::uint64_t>(i) + 1)]);
  Eigen::VectorXd shuffled(40);
  for (int i = 0; i < 40; ++i) shuffled(i) = g(order[i]);
  for (double q : {0.0, 0.5, 0.9, 0.95, 0.99}) EXPECT_EQ(cvar(g, q), cvar(shuffled, q));
}

TEST(Cvar, DominatedLossesHaveSmallerTails) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto g = random_losses(s, 30);
    const Eigen::VectorXd h = g + random_losses(s + 100, 30);
    for (double q : {0.0, 0.5, 0.9, 0.95}) EXPECT_LE(cvar(g, q), cvar(h, q));
  }
}

TEST(Cvar, RejectsBadInput) {
  EXPECT_THROW(cvar(Eigen::VectorXd(0), 0.5), ParameterError);
  EXPECT_THROW(cvar(vec({1, 2}), 1.0), ParameterError);
  EXPECT_THROW(cvar(vec({1, 2}), -0.1), ParameterError);
}

TEST(Summary, MeanMaxAccuracy) {
  const auto s = summary(vec({0.5, 1.5, 4.0}));
  EXPECT_DOUBLE_EQ(s.mean, 2.0);
  EXPECT_DOUBLE_EQ(s.max, 4.0);
  EXPECT_FALSE(s.accuracy.has_value());

  Eigen::MatrixXd logits(3, 2);
  logits << 2, 1, 0, 1, 3, -1;
  const auto c = summary(vec({0.3, 0.3, 2.0}), logits, vec({0, 1, 1}));
  ASSERT_TRUE(c.accuracy.has_value());
  EXPECT_DOUBLE_EQ(*c.accuracy, 2.0 / 3.0);
}

TEST(Summary, RandomClassifierHitsChance) {
  for (int classes : {2, 3, 5}) {
    for (std::uint64_t s = 0; s < 5; ++s) {
      CounterRng rng(s, static_cast<std::uint64_t>(classes));
      const Eigen::Index n = 4000;
      Eigen::MatrixXd logits(n, classes);
      Eigen::VectorXd targets(n);
      for (Eigen::Index i = 0; i < n; ++i) {
        for (int c = 0; c < classes; ++c) logits(i, c) = rng.normal();
        targets(i) = static_cast<double>(rng.below(static_cast<std::uint64_t>(classes)));
      }
      const auto r = summary(Eigen::VectorXd::Ones(n), logits, targets);
      EXPECT_NEAR(*r.accuracy, 1.0 / classes, 0.05);
    }
  }
}

TEST(MultiplierStats, AllZero) {
  const auto st = multiplier_stats(Eigen::VectorXd::Zero(7), 3);
  EXPECT_DOUBLE_EQ(st.fraction_zero, 1.0);
  EXPECT_DOUBLE_EQ(st.fraction_positive, 0.0);
  EXPECT_EQ(st.top_k_ids, (std::vector<int>{0, 1, 2}));
}

TEST(MultiplierStats, TopKAndPercentiles) {
  const auto st = multiplier_stats(vec({0, 0.2, 6}), 1);
  EXPECT_EQ(st.top_k_ids, std::vector<int>{2});
  EXPECT_NEAR(st.fraction_zero, 1.0 / 3.0, 1e-15);
  ASSERT_EQ(st.percentiles.size(), 11u);
  EXPECT_DOUBLE_EQ(st.percentiles.front(), 0.0);
  EXPECT_DOUBLE_EQ(st.percentiles.back(), 6.0);
  EXPECT_TRUE(std::is_sorted(st.percentiles.begin(), st.percentiles.end()));

  const auto ties = multiplier_stats(vec({1, 3, 3, 2}), 2);
  EXPECT_EQ(ties.top_k_ids, (std::vector<int>{1, 2}));
  EXPECT_THROW(multiplier_stats(vec({1, 2}), 3), ParameterError);
}

TEST(MultiplierStats, FractionsSumToOne) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    CounterRng rng(s, 1);
    Eigen::VectorXd lambda(25);
    for (Eigen::Index i = 0; i < 25; ++i) lambda(i) = rng.uniform() < 0.4 ? 0.0 : rng.uniform();
    const auto st = multiplier_stats(lambda, 5);
    EXPECT_DOUBLE_EQ(st.fraction_zero + st.fraction_positive, 1.0);
  }
}

TEST(Spearman, Examples) {
  EXPECT_DOUBLE_EQ(spearman(vec({1, 2, 3, 4}), vec({10, 20, 30, 40})).value, 1.0);
  EXPECT_DOUBLE_EQ(spearman(vec({1, 2, 3, 4}), vec({4, 3, 2, 1})).value, -1.0);
  EXPECT_DOUBLE_EQ(spearman(vec({1, 2, 3}), vec({1, 8, 27})).value, 1.0);
  // Average ranks: a -> [1, 2.5, 2.5, 4].
  EXPECT_NEAR(spearman(vec({1, 2, 2, 3}), vec({1, 2, 3, 4})).value, 0.9486832980505138, 1e-12);

  const auto flat = spearman(Eigen::VectorXd::Constant(4, 1.0), vec({1, 2, 3, 4}));
  EXPECT_TRUE(flat.degenerate);
  EXPECT_EQ(flat.value, 0.0);
  EXPECT_FALSE(spearman(vec({1, 2}), vec({2, 1})).degenerate);
}

TEST(Spearman, SymmetricAndBounded) {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const auto a = random_losses(s, 15);
    const auto b = random_losses(s + 50, 15);
    const double ab = spearman(a, b).value;
    EXPECT_DOUBLE_EQ(ab, spearman(b, a).value);
    EXPECT_LE(std::abs(ab), 1.0 + 1e-15);
  }
}

TEST(Spearman, MarginCorrelationUsesNegatedMargins) {
  const auto r = margin_multiplier_correlation(vec({0, 0.1, 0.5, 2}), vec({3, 1, -0.5, -2}));
  EXPECT_DOUBLE_EQ(r.value, 1.0);
  EXPECT_THROW(spearman(vec({1, 2}), vec({1, 2, 3})), ShapeError);
}

TEST(LossDistribution, SortedWithIds) {
  const auto d = LossDistribution::from(vec({0.3, 0.1, 0.2}));
  ASSERT_EQ(d.entries.size(), 3u);
  EXPECT_EQ(d.entries[0], std::make_pair(0.1, 1));
  EXPECT_EQ(d.entries[2], std::make_pair(0.3, 0));
}

}  // namespace
