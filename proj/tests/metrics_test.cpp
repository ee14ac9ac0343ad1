#include "binclust/metrics.hpp"

#include <gtest/gtest.h>

#include "binclust/rng.hpp"
#include "oracles.hpp"

using namespace binclust;

namespace {

TEST(Ari, IdenticalPartitionsScoreOne) {
  EXPECT_DOUBLE_EQ(ari({0, 0, 1, 1, 2}, {0, 0, 1, 1, 2}), 1.0);
  EXPECT_DOUBLE_EQ(ari({0, 0, 1, 1, 2}, {2, 2, 0, 0, 1}), 1.0);  // relabeled
}

TEST(Ari, SingleClusterAgainstAnythingScoresZero) {
  EXPECT_DOUBLE_EQ(ari({0, 0, 0, 0}, {0, 1, 0, 1}), 0.0);
  EXPECT_DOUBLE_EQ(ari({0, 1, 2, 0}, {5, 5, 5, 5}), 0.0);
}

TEST(Ari, BothTrivialPartitionsScoreOne) {
  EXPECT_DOUBLE_EQ(ari({0, 0, 0}, {1, 1, 1}), 1.0);
}

TEST(Ari, MatchesPairCountingOnHandExample) {
  const std::vector<int> a{0, 0, 1, 1, 2, 2};
  const std::vector<int> b{0, 0, 1, 2, 2, 2};
  EXPECT_NEAR(ari(a, b), oracle::pair_counting_ari(a, b), 1e-14);
}

TEST(Ari, ExhaustivePairCountingEquivalence) {
  Rng rng(33);
  for (int rep = 0; rep < 200; ++rep) {
    const int n = 2 + rng.next_index(11);  // n <= 12
    std::vector<int> a(n), b(n);
    for (int i = 0; i < n; ++i) {
      a[i] = rng.next_index(4);
      b[i] = rng.next_index(4);
    }
    EXPECT_NEAR(ari(a, b), oracle::pair_counting_ari(a, b), 1e-13);
    EXPECT_NEAR(ari(a, b), ari(b, a), 1e-14);  // symmetry
  }
}

TEST(Ari, RejectsBadInput) {
  EXPECT_THROW(ari({0, 1}, {0, 1, 2}), std::invalid_argument);
  EXPECT_THROW(ari({0}, {0}), std::invalid_argument);
}

TEST(SenSpe, HandValues) {
  const std::vector<int> omega_true{0, 1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(sensitivity(omega_true, omega_true), 1.0);
  EXPECT_DOUBLE_EQ(specificity(omega_true, omega_true, 20), 1.0);

  std::vector<int> all(20);
  std::iota(all.begin(), all.end(), 0);
  EXPECT_DOUBLE_EQ(sensitivity(all, omega_true), 1.0);
  EXPECT_DOUBLE_EQ(specificity(all, omega_true, 20), 0.0);

  const std::vector<int> partial{0, 1, 2, 6};
  EXPECT_DOUBLE_EQ(sensitivity(partial, omega_true), 0.5);
  EXPECT_DOUBLE_EQ(specificity(partial, omega_true, 20), 13.0 / 14.0);
}

TEST(SenSpe, ExtraIrrelevantVariableOnlyHurtsSpecificity) {
  const std::vector<int> omega_true{0, 1, 2};
  const std::vector<int> base{0, 1};
  std::vector<int> extra = base;
  extra.push_back(7);
  EXPECT_DOUBLE_EQ(sensitivity(base, omega_true), sensitivity(extra, omega_true));
  EXPECT_LT(specificity(extra, omega_true, 10), specificity(base, omega_true, 10));
}

TEST(SenSpe, EmptyDenominatorsRejected) {
  EXPECT_THROW(sensitivity({0}, {}), std::invalid_argument);
  EXPECT_THROW(specificity({0}, {0, 1}, 2), std::invalid_argument);
}

TEST(SelectionTable, CountsDenseBuckets) {
  const SelectionTable uniform = selection_table({2, 2, 2}, 4, 2);
  EXPECT_EQ(uniform.prob, (std::vector<double>{0, 1, 0, 0}));
  EXPECT_DOUBLE_EQ(uniform.truth_rate, 1.0);
  EXPECT_DOUBLE_EQ(uniform.over_rate, 0.0);

  const SelectionTable mixed = selection_table({2, 3, 3, 4}, 4, 3);
  EXPECT_DOUBLE_EQ(mixed.truth_rate, 0.5);
  EXPECT_DOUBLE_EQ(mixed.over_rate, 0.25);
  EXPECT_DOUBLE_EQ(mixed.prob[0], 0.0);  // empty bucket still emitted
  EXPECT_DOUBLE_EQ(mixed.prob[1], 0.25);

  EXPECT_THROW(selection_table({}, 3, 2), std::invalid_argument);
}

}  // namespace
