#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <vector>

#include "bufalu/policies.hpp"

using namespace bufalu;

namespace {

/// Deterministic [0,1] instance after initialisation, before round 3.
RunState walkthrough_state() {
  RunState s(2);
  update(s, 0, 0.0, true);
  update(s, 1, 1.0, true);
  return s;
}

const double kEps3 = std::pow(3.0, -0.25);

}  // namespace

TEST(Policies, ParseNames) {
  for (auto p : {PolicyKind::bufalu, PolicyKind::bufau, PolicyKind::cbm, PolicyKind::greedy}) {
    EXPECT_EQ(parse_policy(policy_name(p)), p);
  }
  EXPECT_THROW(parse_policy("ucb"), std::invalid_argument);
}

TEST(Policies, InitialisationPlaysEachArmAndQueries) {
  RunState s(3);
  for (auto p : {PolicyKind::bufalu, PolicyKind::bufau, PolicyKind::cbm, PolicyKind::greedy}) {
    for (std::uint64_t t = 1; t <= 3; ++t) {
      const auto d = decide(p, t, s, HoeffdingRule{}, 0.5);
      EXPECT_EQ(d.arm, t - 1);
      EXPECT_TRUE(d.query);
    }
  }
  EXPECT_THROW(decide(PolicyKind::bufalu, 0, s, HoeffdingRule{}, 0.5), std::invalid_argument);
}

TEST(Policies, WalkthroughIntervals) {
  const auto ci = round_intervals(walkthrough_state(), HoeffdingRule{}, 3);
  EXPECT_NEAR(ci[0].lcb, -1.2837, 1e-4);
  EXPECT_NEAR(ci[1].lcb, -0.2837, 1e-4);
  EXPECT_NEAR(ci[0].ucb, 1.2837, 1e-4);
  EXPECT_NEAR(ci[1].ucb, 2.2837, 1e-4);
  EXPECT_NEAR(kEps3, 0.7598, 1e-4);
}

TEST(BuFALU, WalkthroughPlaysWiderCompetitorAndQueries) {
  const auto d = bufalu_decide(3, walkthrough_state(), HoeffdingRule{}, kEps3);
  EXPECT_EQ(d.diagnostics.l, 1u);
  EXPECT_EQ(*d.diagnostics.u, 0u);
  EXPECT_EQ(*d.diagnostics.c, 0u);
  EXPECT_EQ(d.arm, 0u);
  EXPECT_TRUE(d.query);
}

TEST(BuFALU, SeparatedStateExploitsWithoutQuery) {
  const std::vector<Interval> ci{{0.0, 0.2}, {0.3, 0.9}, {-0.1, 0.25}};
  const auto d = bufalu_choose(ci, 0.0);
  EXPECT_TRUE(d.diagnostics.separated);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_FALSE(d.query);
}

TEST(BuFALU, LargeEpsilonExploitsWithoutQuery) {
  const auto d = bufalu_decide(3, walkthrough_state(), HoeffdingRule{}, 1e9);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_FALSE(d.query);
}

TEST(BuFALU, UnvisitedArmsTieToLowestIndex) {
  const std::vector<Interval> ci(3);
  const auto d = bufalu_choose(ci, 0.1);
  EXPECT_EQ(d.diagnostics.l, 0u);
  EXPECT_EQ(*d.diagnostics.u, 1u);
  EXPECT_EQ(*d.diagnostics.c, 0u);
  EXPECT_TRUE(d.query);
}

TEST(BuFALU, InfiniteBoundsBeatFinite) {
  const std::vector<Interval> ci{{0.2, 0.4}, {-kInf, kInf}, {0.1, 0.3}};
  const auto d = bufalu_choose(ci, 0.1);
  EXPECT_EQ(d.diagnostics.l, 0u);
  EXPECT_EQ(*d.diagnostics.u, 1u);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_TRUE(d.query);
}

TEST(BuFAU, WalkthroughPlaysGlobalUcbLeader) {
  const auto d = bufau_decide(3, walkthrough_state(), HoeffdingRule{}, kEps3);
  EXPECT_EQ(*d.diagnostics.u, 1u);
  EXPECT_EQ(*d.diagnostics.u_rest, 0u);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_TRUE(d.query);
}

TEST(BuFAU, GateBranches) {
  const std::vector<Interval> separated{{0.0, 0.2}, {0.3, 0.9}};
  EXPECT_FALSE(bufau_choose(separated, 0.0).query);
  EXPECT_EQ(bufau_choose(separated, 0.0).arm, 1u);
  EXPECT_FALSE(bufau_decide(3, walkthrough_state(), HoeffdingRule{}, 3.0).query);
}

TEST(CBM, Gate) {
  const auto d = cbm_decide(3, walkthrough_state(), HoeffdingRule{}, kEps3);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_TRUE(d.query);
  EXPECT_TRUE(cbm_decide(3, walkthrough_state(), HoeffdingRule{}, 0.0).query);
  const std::vector<Interval> narrow{{0.1, 0.2}, {0.4, 0.45}};
  EXPECT_FALSE(cbm_choose(narrow, 0.1).query);
  EXPECT_EQ(cbm_choose(narrow, 0.1).arm, 1u);
}

TEST(Greedy, EffectiveBudget) {
  EXPECT_NEAR(greedy_effective_budget(3, 2, kEps3), 24.83, 0.01);
  EXPECT_EQ(greedy_effective_budget(3, 2, 0.0), kInf);
  const auto d = greedy_decide(3, walkthrough_state(), HoeffdingRule{}, kEps3);
  EXPECT_EQ(d.arm, 1u);
  EXPECT_TRUE(d.query);
}

TEST(Greedy, ExhaustedBudgetExploitsEmpiricalLeader) {
  RunState s(2);
  for (int i = 0; i < 50; ++i) {
    update(s, 0, 0.9, true);
    update(s, 1, 0.2, true);
  }
  // B_eff at eps = 1, K = 2, t = 101 is 12 ln 101 + 2 ~ 57.4 < 100 queries.
  const auto d = greedy_decide(101, s, HoeffdingRule{}, 1.0);
  EXPECT_EQ(d.arm, 0u);
  EXPECT_FALSE(d.query);
  EXPECT_TRUE(greedy_decide(101, s, HoeffdingRule{}, 0.0).query);
}

TEST(TieBreaker, RandomisedTiesCoverTiedSet) {
  std::mt19937_64 gen(3);
  const TieBreaker tie(&gen);
  const std::vector<double> v{1.0, 3.0, 3.0, 0.0, 3.0};
  std::vector<int> hits(5, 0);
  for (int i = 0; i < 3000; ++i) ++hits[tie.argmax(5, [&](ArmIndex a) { return v[a]; })];
  EXPECT_EQ(hits[0] + hits[3], 0);
  for (int a : {1, 2, 4}) EXPECT_GT(hits[a], 800);
  EXPECT_EQ(TieBreaker().argmax(5, [&](ArmIndex a) { return v[a]; }), 1u);
  EXPECT_EQ(TieBreaker().argmax(5, [&](ArmIndex a) { return v[a]; }, 1), 2u);
}

TEST(Policies, QueryImpliesWidthAboveEpsilon) {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int rep = 0; rep < 5000; ++rep) {
    std::vector<Interval> ci(4);
    for (auto& c : ci) {
      const double m = u(gen);
      const double w = u(gen) * 0.5;
      c = {m - w, m + w};
    }
    const double eps = u(gen) * 0.6;
    for (const auto& d : {bufalu_choose(ci, eps), bufau_choose(ci, eps)}) {
      if (d.query) {
        EXPECT_GT(ci[d.arm].width(), eps);
      }
    }
    const auto d = bufalu_choose(ci, eps);
    if (!d.query) {
      EXPECT_EQ(d.arm, d.diagnostics.l);
    }
  }
}
