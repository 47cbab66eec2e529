#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>

#include <gtest/gtest.h>

#include "feasible/data.hpp"
#include "feasible/error.hpp"

namespace {

using namespace feasible;

bool bitwise_equal(const Dataset& a, const Dataset& b) {
  return a.features.rows() == b.features.rows() && a.features.cols() == b.features.cols() &&
         std::equal(a.features.data(), a.features.data() + a.features.size(), b.features.data()) &&
         std::equal(a.targets.data(), a.targets.data() + a.targets.size(), b.targets.data()) &&
         a.ids == b.ids;
}

TEST(TwoMoons, BalancedClasses) {
  const auto d = gen_two_moons(1000, 0.1, 0);
  ASSERT_EQ(d.size(), 1000);
  EXPECT_EQ(d.dims(), 2);
  EXPECT_EQ(d.task, Task::classification);
  EXPECT_EQ(d.num_classes, 2);
  EXPECT_EQ((d.targets.array() == 0.0).count(), 500);
  EXPECT_EQ((d.targets.array() == 1.0).count(), 500);
  EXPECT_NO_THROW(d.validate());
}

TEST(TwoMoons, NoiselessPointsLieOnUnitHalfCircles) {
  const auto d = gen_two_moons(4, 0.0, 7);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    const double x = d.features(i, 0), y = d.features(i, 1);
    if (d.label(i) == 0) {
      EXPECT_NEAR(std::hypot(x, y), 1.0, 1e-12);
      EXPECT_GE(y, -1e-12);
    } else {
      EXPECT_NEAR(std::hypot(x - 1.0, y - 0.5), 1.0, 1e-12);
      EXPECT_LE(y, 0.5 + 1e-12);
    }
  }
}

TEST(TwoMoons, Deterministic) {
  EXPECT_TRUE(bitwise_equal(gen_two_moons(1000, 0.1, 3), gen_two_moons(1000, 0.1, 3)));
  EXPECT_FALSE(bitwise_equal(gen_two_moons(1000, 0.1, 3), gen_two_moons(1000, 0.1, 4)));
}

TEST(TwoMoons, RejectsBadArguments) {
  EXPECT_THROW(gen_two_moons(3, 0.1, 0), ParameterError);
  EXPECT_THROW(gen_two_moons(0, 0.1, 0), ParameterError);
  EXPECT_THROW(gen_two_moons(10, -0.1, 0), ParameterError);
}

TEST(NoisyCosine, ShapeAndDomain) {
  const auto d = gen_noisy_cosine(20, 0.2, 0);
  ASSERT_EQ(d.size(), 20);
  EXPECT_EQ(d.dims(), 1);
  EXPECT_EQ(d.task, Task::regression);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    EXPECT_GE(d.features(i, 0), 0.0);
    EXPECT_LE(d.features(i, 0), 1.0);
  }
}

TEST(NoisyCosine, ZeroNoiseIsOnTheWave) {
  const auto d = gen_noisy_cosine(5, 0.0, 0);
  for (Eigen::Index i = 0; i < d.size(); ++i) {
    EXPECT_DOUBLE_EQ(d.targets(i), cosine_wave(d.features(i, 0)));
    EXPECT_DOUBLE_EQ(cosine_wave(d.features(i, 0)),
                     std::cos(2.0 * std::numbers::pi * d.features(i, 0)));
  }
}

TEST(NoisyCosine, ResidualSpreadMatchesSigma) {
  const auto d = gen_noisy_cosine(20, 0.2, 1);
  Eigen::VectorXd r(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) r(i) = d.targets(i) - cosine_wave(d.features(i, 0));
  const double sd = std::sqrt((r.array() - r.mean()).square().sum() / (r.size() - 1));
  EXPECT_GE(sd, 0.1);
  EXPECT_LE(sd, 0.3);
}

TEST(NoisyCosine, RejectsBadArguments) {
  EXPECT_THROW(gen_noisy_cosine(0, 0.2, 0), ParameterError);
  EXPECT_THROW(gen_noisy_cosine(5, -1.0, 0), ParameterError);
}

TEST(ConflictingPairs, SinglePair) {
  const auto d = gen_conflicting_pairs(1, 1, 2.0, 0);
  ASSERT_EQ(d.size(), 2);
  EXPECT_EQ(d.features(0, 0), d.features(1, 0));
  EXPECT_DOUBLE_EQ(d.targets(1) - d.targets(0), 2.0);
}

TEST(ConflictingPairs, EightPairsInTwoDims) {
  const auto d = gen_conflicting_pairs(8, 2, 1.0, 0);
  ASSERT_EQ(d.size(), 16);
  EXPECT_EQ(d.dims(), 2);
  std::set<std::pair<double, double>> rows;
  for (Eigen::Index i = 0; i < d.size(); ++i) rows.emplace(d.features(i, 0), d.features(i, 1));
  EXPECT_EQ(rows.size(), 8u);
  for (Eigen::Index k = 0; k < 8; ++k)
    EXPECT_NEAR(d.targets(2 * k + 1) - d.targets(2 * k), 1.0, 1e-12);
}

TEST(ConflictingPairs, RejectsBadArguments) {
  EXPECT_THROW(gen_conflicting_pairs(0, 1, 1.0, 0), ParameterError);
  EXPECT_THROW(gen_conflicting_pairs(2, 1, 0.0, 0), ParameterError);
}

TEST(OutlierRegression, AboutFivePercentShifted) {
  const int n = 4000;
  const auto noisy = gen_outlier_regression(n, 3, 2.0, 0.0, 5);
  int shifted = 0;
  for (Eigen::Index i = 0; i < noisy.size(); ++i) {
    double clean = 0.0;
    for (int j = 0; j < 3; ++j) clean += noisy.features(i, j) * (j + 1) / 3.0;
    const double delta = noisy.targets(i) - clean;
    if (std::abs(delta - 2.0) < 1e-9) ++shifted;
    else EXPECT_NEAR(delta, 0.0, 1e-9);
  }
  EXPECT_NEAR(shifted / static_cast<double>(n), 0.05, 0.015);
}

TEST(PolyFeatures, MonomialAtZero) {
  const auto row = poly_features(Eigen::VectorXd::Constant(1, 0.0), 2, Basis::monomial);
  ASSERT_EQ(row.cols(), 3);
  EXPECT_EQ(row(0, 0), 1.0);
  EXPECT_EQ(row(0, 1), 0.0);
  EXPECT_EQ(row(0, 2), 0.0);
}

TEST(PolyFeatures, ChebyshevAtOneIsAllOnes) {
  const auto row = poly_features(Eigen::VectorXd::Constant(1, 1.0), 3, Basis::chebyshev);
  for (int j = 0; j < 4; ++j) EXPECT_DOUBLE_EQ(row(0, j), 1.0);
}

TEST(PolyFeatures, ChebyshevAtHalf) {
  const auto row = poly_features(Eigen::VectorXd::Constant(1, 0.5), 2, Basis::chebyshev);
  EXPECT_DOUBLE_EQ(row(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(row(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(row(0, 2), -0.5);
}

TEST(PolyFeatures, ChebyshevDomainIsRescaled) {
  // 0.75 on [0, 1] maps to 0.5 on [-1, 1].
  const auto row =
      poly_features(Eigen::VectorXd::Constant(1, 0.75), 2, Basis::chebyshev, Domain{0.0, 1.0});
  EXPECT_DOUBLE_EQ(row(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(row(0, 2), -0.5);
}

TEST(PolyFeatures, RejectsNegativeDegree) {
  EXPECT_THROW(poly_features(Eigen::VectorXd::Zero(2), -1, Basis::monomial), ParameterError);
}

TEST(PolyFeatures, ChebyshevBetterConditionedFromDegreeFive) {
  const auto d = gen_noisy_cosine(20, 0.2, 0);
  const Eigen::VectorXd x = d.features.col(0);
  for (int degree = 5; degree <= 19; ++degree) {
    const double cheb = condition_number(poly_features(x, degree, Basis::chebyshev, {0.0, 1.0}));
    const double mono = condition_number(poly_features(x, degree, Basis::monomial));
    EXPECT_LE(cheb, mono) << "degree " << degree;
  }
}

TEST(BatchIter, PartitionSizes) {
  const auto d = gen_noisy_cosine(10, 0.0, 0);
  const auto batches = batch_iter(d, 4, 11);
  ASSERT_EQ(batches.size(), 3u);
  EXPECT_EQ(batches[0].size(), 4);
  EXPECT_EQ(batches[1].size(), 4);
  EXPECT_EQ(batches[2].size(), 2);
}

TEST(BatchIter, FullBatch) {
  const auto d = gen_noisy_cosine(10, 0.0, 0);
  const auto batches = batch_iter(d, 10, 11);
  ASSERT_EQ(batches.size(), 1u);
  auto ids = batches[0].ids;
  std::sort(ids.begin(), ids.end());
  for (int i = 0; i < 10; ++i) EXPECT_EQ(ids[static_cast<std::size_t>(i)], i);
}

TEST(BatchIter, SameSeedSameOrder) {
  EXPECT_EQ(shuffled_partition(37, 5, 99), shuffled_partition(37, 5, 99));
  EXPECT_NE(shuffled_partition(37, 5, 99), shuffled_partition(37, 5, 100));
}

TEST(BatchIter, RejectsBadBatchSize) {
  const auto d = gen_noisy_cosine(10, 0.0, 0);
  EXPECT_THROW(batch_iter(d, 0, 0), ParameterError);
  EXPECT_THROW(batch_iter(d, 11, 0), ParameterError);
}

TEST(BatchIter, RowsMatchIds) {
  const auto d = gen_two_moons(20, 0.1, 2);
  for (const auto& b : batch_iter(d, 6, 4))
    for (Eigen::Index r = 0; r < b.size(); ++r) {
      const auto id = b.ids[static_cast<std::size_t>(r)];
      EXPECT_EQ(b.features.row(r), d.features.row(id));
      EXPECT_EQ(b.targets(r), d.targets(id));
    }
}

// Property: for every n and batch size the epoch's batches partition 0..n-1.
TEST(BatchIterProperty, UnionIsAllIdsExactlyOnce) {
  for (int n = 1; n <= 40; n += 3)
    for (int bs = 1; bs <= n; bs += 2)
      for (std::uint64_t seed = 0; seed < 3; ++seed) {
        std::vector<int> all;
        for (const auto& part : shuffled_partition(n, bs, seed)) {
          EXPECT_LE(static_cast<int>(part.size()), bs);
          std::set<int> unique(part.begin(), part.end());
          EXPECT_EQ(unique.size(), part.size());
          all.insert(all.end(), part.begin(), part.end());
        }
        std::sort(all.begin(), all.end());
        ASSERT_EQ(static_cast<int>(all.size()), n);
        for (int i = 0; i < n; ++i) EXPECT_EQ(all[static_cast<std::size_t>(i)], i);
      }
}

// Property: every generator is a pure function of its arguments.
TEST(GeneratorProperty, RepeatedCallsAreBitwiseIdentical) {
  for (std::uint64_t seed : {0ULL, 1ULL, 12345ULL}) {
    EXPECT_TRUE(bitwise_equal(gen_two_moons(50, 0.2, seed), gen_two_moons(50, 0.2, seed)));
    EXPECT_TRUE(bitwise_equal(gen_noisy_cosine(20, 0.2, seed), gen_noisy_cosine(20, 0.2, seed)));
    EXPECT_TRUE(bitwise_equal(gen_conflicting_pairs(5, 3, 1.5, seed),
                              gen_conflicting_pairs(5, 3, 1.5, seed)));
    EXPECT_TRUE(bitwise_equal(gen_outlier_regression(60, 2, 2.0, 0.3, seed),
                              gen_outlier_regression(60, 2, 2.0, 0.3, seed)));
  }
}

TEST(Split, DisjointAndComplete) {
  const auto d = gen_two_moons(100, 0.1, 0);
  const auto [train, test] = train_test_split(d, 0.2, 5);
  EXPECT_EQ(train.size(), 80);
  EXPECT_EQ(test.size(), 20);
  EXPECT_NO_THROW(train.validate());
  EXPECT_NO_THROW(test.validate());
  std::multiset<std::pair<double, double>> all, parts;
  for (Eigen::Index i = 0; i < d.size(); ++i) all.emplace(d.features(i, 0), d.features(i, 1));
  for (const auto* p : {&train, &test})
    for (Eigen::Index i = 0; i < p->size(); ++i) parts.emplace(p->features(i, 0), p->features(i, 1));
  EXPECT_EQ(all, parts);
}

TEST(Dataset, ValidateCatchesBrokenInvariants) {
  auto d = gen_two_moons(10, 0.1, 0);
  auto bad_ids = d;
  bad_ids.ids[0] = bad_ids.ids[1];
  EXPECT_THROW(bad_ids.validate(), ParameterError);
  auto bad_label = d;
  bad_label.targets(0) = 2.0;
  EXPECT_THROW(bad_label.validate(), ParameterError);
  auto bad_feature = d;
  bad_feature.features(0, 0) = std::nan("");
  EXPECT_THROW(bad_feature.validate(), ParameterError);
}

class CsvTest : public ::testing::Test {
 protected:
  std::filesystem::path dir_ = std::filesystem::temp_directory_path() / "feasible_csv_test";
  void SetUp() override { std::filesystem::create_directories(dir_); }
  void TearDown() override { std::filesystem::remove_all(dir_); }
};

TEST_F(CsvTest, RoundTripIsExact) {
  const auto d = gen_two_moons(30, 0.1, 4);
  write_dataset_csv(d, dir_ / "d.csv");
  const auto back = read_dataset_csv(dir_ / "d.csv", Task::classification);
  EXPECT_TRUE(bitwise_equal(d, back));
  EXPECT_EQ(back.num_classes, 2);
  EXPECT_EQ(dataset_signature(d), dataset_signature(back));
}

TEST_F(CsvTest, RejectsBadHeaderAndIds) {
  std::ofstream(dir_ / "h.csv") << "idx,feat_0,target\n0,1,2\n";
  EXPECT_THROW(read_dataset_csv(dir_ / "h.csv", Task::regression), ParameterError);
  std::ofstream(dir_ / "i.csv") << "id,feat_0,target\n0,1,2\n0,1,3\n";
  EXPECT_THROW(read_dataset_csv(dir_ / "i.csv", Task::regression), ParameterError);
  std::ofstream(dir_ / "n.csv") << "id,feat_0,target\n0,abc,2\n";
  EXPECT_THROW(read_dataset_csv(dir_ / "n.csv", Task::regression), ParameterError);
}

TEST_F(CsvTest, RowsAreStoredById) {
  std::ofstream(dir_ / "o.csv") << "id,feat_0,target\n1,10,20\n0,30,40\n";
  const auto d = read_dataset_csv(dir_ / "o.csv", Task::regression);
  EXPECT_EQ(d.features(0, 0), 30.0);
  EXPECT_EQ(d.targets(1), 20.0);
}

TEST(Signature, SensitiveToData) {
  auto a = gen_noisy_cosine(10, 0.2, 0);
  auto b = a;
  b.targets(3) += 1e-15;
  EXPECT_NE(dataset_signature(a), dataset_signature(b));
  EXPECT_EQ(dataset_signature(a).size(), 16u);
}

}  // namespace
