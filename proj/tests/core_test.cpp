#include <gtest/gtest.h>

#include <random>
#include <vector>

#include "bufalu/core.hpp"

using namespace bufalu;

namespace {

double two_pass_variance(const std::vector<double>& xs) {
  if (xs.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

}  // namespace

TEST(ArmModel, ValidatesParameters) {
  EXPECT_THROW(ArmModel::bernoulli(1.5), std::invalid_argument);
  EXPECT_THROW(ArmModel::bernoulli(-0.1), std::invalid_argument);
  EXPECT_THROW(ArmModel::deterministic(2.0), std::invalid_argument);
  EXPECT_NO_THROW(ArmModel::gaussian_unit(-3.0));
  EXPECT_DOUBLE_EQ(ArmModel::bernoulli(0.25).mean(), 0.25);
  EXPECT_DOUBLE_EQ(ArmModel::bernoulli(0.25).variance(), 0.1875);
  EXPECT_DOUBLE_EQ(ArmModel::deterministic(1.0).variance(), 0.0);
}

TEST(BanditInstance, RejectsSingleArm) {
  EXPECT_THROW(BanditInstance({ArmModel::bernoulli(0.5)}), std::invalid_argument);
}

TEST(BanditInstance, GapStructure) {
  BanditInstance inst({ArmModel::bernoulli(0.25), ArmModel::bernoulli(0.25), ArmModel::bernoulli(0.25),
                       ArmModel::bernoulli(0.25), ArmModel::bernoulli(0.5)});
  EXPECT_DOUBLE_EQ(inst.mu_star(), 0.5);
  EXPECT_TRUE(inst.unique_optimal());
  EXPECT_EQ(inst.optimal_set(), std::vector<ArmIndex>{4});
  EXPECT_DOUBLE_EQ(*inst.delta_min(), 0.25);
  EXPECT_DOUBLE_EQ(inst.delta_max(), 0.25);
  EXPECT_DOUBLE_EQ(*inst.best_suboptimal_mean(), 0.25);
  for (double g : inst.gaps()) EXPECT_GE(g, 0.0);
}

TEST(BanditInstance, AllOptimalHasNoMinimumGap) {
  BanditInstance inst({ArmModel::deterministic(1.0), ArmModel::deterministic(1.0)});
  EXPECT_FALSE(inst.delta_min().has_value());
  EXPECT_FALSE(inst.best_suboptimal_mean().has_value());
  EXPECT_DOUBLE_EQ(inst.delta_max(), 0.0);
  EXPECT_EQ(inst.optimal_set().size(), 2u);
}

TEST(RunState, EmpiricalMean) {
  RunState s(2);
  EXPECT_EQ(empirical_mean(s, 0), 0.0);
  s.queries[0] = 4;
  s.sum[0] = 3.0;
  EXPECT_DOUBLE_EQ(empirical_mean(s, 0), 0.75);

  RunState r(2);
  for (double x : {0.0, 1.0, 1.0}) update(r, 1, x, true);
  EXPECT_DOUBLE_EQ(empirical_mean(r, 1), 2.0 / 3.0);
}

TEST(RunState, EmpiricalVariance) {
  RunState s(1 + 1);
  update(s, 0, 1.0, true);
  EXPECT_EQ(empirical_variance(s, 0), 0.0);
  update(s, 0, 0.0, true);
  EXPECT_DOUBLE_EQ(empirical_variance(s, 0), 0.5);

  for (double c : {0.0, 0.3, 1.0}) {
    RunState k(2);
    for (int i = 0; i < 3; ++i) update(k, 1, c, true);
    EXPECT_NEAR(empirical_variance(k, 1), 0.0, 1e-15);
  }
}

TEST(RunState, UpdateAccounting) {
  RunState s(2);
  update(s, 0, 1.0, true);
  EXPECT_EQ(s.plays[0], 1u);
  EXPECT_EQ(s.queries[0], 1u);
  EXPECT_DOUBLE_EQ(s.sum[0], 1.0);
  update(s, 0, 1.0, false);
  EXPECT_EQ(s.plays[0], 2u);
  EXPECT_EQ(s.queries[0], 1u);
  EXPECT_DOUBLE_EQ(s.sum[0], 1.0);
  EXPECT_EQ(s.t, 2u);
  EXPECT_THROW(update(s, 2, 0.0, true), std::out_of_range);

  RunState m(2);
  m = updated(updated(m, 0, 0.0, true), 0, 1.0, true);
  EXPECT_DOUBLE_EQ(empirical_mean(m, 0), 0.5);
}

TEST(RunState, RandomSequencesKeepInvariantsAndMatchTwoPassVariance) {
  std::mt19937_64 gen(7);
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t k = 2 + gen() % 4;
    RunState s(k);
    std::vector<std::vector<double>> observed(k);
    const std::size_t len = 1 + gen() % 1000;
    for (std::size_t i = 0; i < len; ++i) {
      const ArmIndex a = gen() % k;
      const double r = std::uniform_real_distribution<double>(0.0, 1.0)(gen);
      const bool q = gen() % 3 != 0;
      update(s, a, r, q);
      if (q) observed[a].push_back(r);
    }
    std::uint64_t plays = 0;
    std::uint64_t queries = 0;
    for (ArmIndex a = 0; a < k; ++a) {
      EXPECT_LE(s.queries[a], s.plays[a]);
      plays += s.plays[a];
      queries += s.queries[a];
      EXPECT_NEAR(empirical_variance(s, a), two_pass_variance(observed[a]), 1e-12);
    }
    EXPECT_EQ(plays, s.t);
    EXPECT_EQ(queries, s.total_queries);
  }
}

TEST(RunState, StatisticsIgnoreInterleavedUnqueriedRounds) {
  const std::vector<double> rewards{0.2, 0.9, 0.4, 1.0, 0.0, 0.7};
  RunState plain(2);
  RunState mixed(2);
  for (double r : rewards) {
    update(plain, 0, r, true);
    update(mixed, 1, 0.5, false);
    update(mixed, 0, 0.123, false);
    update(mixed, 0, r, true);
  }
  EXPECT_EQ(empirical_mean(plain, 0), empirical_mean(mixed, 0));
  EXPECT_EQ(empirical_variance(plain, 0), empirical_variance(mixed, 0));
}
