#include <gtest/gtest.h>

#include <cmath>

#include "bufalu/schedules.hpp"

using namespace bufalu;

TEST(Schedule, PointValues) {
  EXPECT_DOUBLE_EQ(EpsilonSchedule::power(0.25)(256.0), 0.25);
  EXPECT_NEAR(EpsilonSchedule::power(0.3)(1000.0), std::pow(1000.0, -0.3), 1e-15);
  EXPECT_EQ(EpsilonSchedule::zero()(12345.0), 0.0);
  EXPECT_NEAR(EpsilonSchedule::fixed_budget(2000.0, 5)(1e5), 0.415565, 1e-6);
  EXPECT_NEAR(EpsilonSchedule::inv_log()(100.0), 1.0 / std::log(100.0), 1e-15);
  EXPECT_THROW(EpsilonSchedule::inv_log()(1.0), std::domain_error);
  EXPECT_THROW(EpsilonSchedule::power(-1.0), std::invalid_argument);
  EXPECT_THROW(EpsilonSchedule::fixed_budget(0.0, 2), std::invalid_argument);
}

TEST(Schedule, BudgetDerived) {
  const auto h = EpsilonSchedule::from_budget_hoeffding(BudgetFn::linear(0.1), 4);
  EXPECT_NEAR(h(500.0), std::sqrt(6.0 * 4.0 * std::log(500.0) / 50.0), 1e-15);
  EXPECT_DOUBLE_EQ(*h.budget(500.0), 50.0);
  const auto b = EpsilonSchedule::from_budget_bernstein(BudgetFn::constant(400.0), 4);
  const double m = 99.0;
  const double l = std::log(1000.0);
  EXPECT_NEAR(b(1000.0), std::sqrt(6.0 * l / m) + 14.0 * l / m, 1e-15);
  EXPECT_THROW(EpsilonSchedule::from_budget_bernstein(BudgetFn::constant(4.0), 4)(10.0), std::domain_error);
  EXPECT_FALSE(EpsilonSchedule::power(0.25).has_budget());
}

TEST(Schedule, NonNegative) {
  const std::vector<EpsilonSchedule> all{EpsilonSchedule::power(0.25), EpsilonSchedule::zero(),
                                         EpsilonSchedule::inv_log(), EpsilonSchedule::fixed_budget(100.0, 3),
                                         EpsilonSchedule::from_budget_hoeffding(BudgetFn::power(2.0, 0.5), 3)};
  for (const auto& s : all) {
    for (double t = 2; t < 1e6; t *= 1.3) EXPECT_GE(s(t), 0.0) << s.describe();
  }
}

TEST(Schedule, BudgetDerivedNonincreasingWhenBudgetOutgrowsLog) {
  for (const auto& fn : {BudgetFn::linear(0.05), BudgetFn::power(3.0, 0.5)}) {
    const auto s = EpsilonSchedule::from_budget_hoeffding(fn, 5);
    double prev = kInf;
    for (std::uint64_t t = 3; t <= 100000; t += 1 + t / 100) {
      const double td = static_cast<double>(t);
      if (fn(td) / std::log(td) < fn(td - 1) / std::log(td - 1)) continue;
      EXPECT_LE(s(td), prev * (1 + 1e-12));
      prev = s(td);
    }
  }
}

TEST(Schedule, ParseAndDescribeRoundTrip) {
  for (std::string spec : {"power:0.25", "zero", "invlog", "fixed:2000", "budget-hoeffding:linear:0.1",
                           "budget-bernstein:const:400", "budget-hoeffding:power:2:0.5"}) {
    EXPECT_EQ(parse_schedule(spec, 5).describe(), spec);
  }
  EXPECT_EQ(parse_schedule("budget-hoeffding", 5, std::string("const:10")).describe(), "budget-hoeffding:const:10");
  EXPECT_THROW(parse_schedule("budget-hoeffding", 5), std::invalid_argument);
  EXPECT_THROW(parse_schedule("power", 5), std::invalid_argument);
  EXPECT_THROW(parse_schedule("power:abc", 5), std::invalid_argument);
  EXPECT_THROW(parse_schedule("sqrt", 5), std::invalid_argument);
  EXPECT_THROW(parse_budget("linear"), std::invalid_argument);
}

TEST(LEpsilon, Examples) {
  EXPECT_EQ(l_epsilon(EpsilonSchedule::zero(), 100, 0.1), 0u);
  EXPECT_EQ(l_epsilon(EpsilonSchedule::power(0.25), 1000, 0.25), 256u);
  EXPECT_EQ(l_epsilon(EpsilonSchedule::power(0.25), 1000, 0.0), 1000u);
  EXPECT_EQ(l_epsilon(EpsilonSchedule::inv_log(), 1000, 0.0), 1000u);
  EXPECT_EQ(l_epsilon(EpsilonSchedule::fixed_budget(50.0, 2), 777, 0.0), 777u);
}

TEST(LEpsilon, MatchesInverseForMonotoneSchedules) {
  for (const auto& s : {EpsilonSchedule::power(0.25), EpsilonSchedule::power(0.5), EpsilonSchedule::inv_log()}) {
    for (double delta : {0.05, 0.1, 0.2, 0.25, 0.3, 0.5, 0.9}) {
      const auto inv = epsilon_inverse(s, delta);
      ASSERT_TRUE(inv.has_value());
      const std::uint64_t horizon = 20000;
      const auto count = l_epsilon(s, horizon, delta);
      EXPECT_EQ(static_cast<double>(count), std::min(*inv, static_cast<double>(horizon))) << s.describe() << delta;
    }
  }
  EXPECT_EQ(*epsilon_inverse(EpsilonSchedule::zero(), 0.1), 0.0);
  EXPECT_EQ(*epsilon_inverse(EpsilonSchedule::power(0.25), 0.0), kInf);
  EXPECT_FALSE(epsilon_inverse(EpsilonSchedule::fixed_budget(10.0, 2), 0.1).has_value());
}

TEST(LEpsilon, Monotone) {
  const auto s = EpsilonSchedule::power(0.25);
  std::uint64_t prev = 0;
  for (std::uint64_t t = 1; t <= 5000; t += 37) {
    const auto v = l_epsilon(s, t, 0.2);
    EXPECT_GE(v, prev);
    prev = v;
  }
  std::uint64_t last = ~0ULL;
  for (double d = 0.0; d <= 1.2; d += 0.05) {
    const auto v = l_epsilon(s, 3000, d);
    EXPECT_LE(v, last);
    last = v;
  }
}

TEST(NBar, Examples) {
  const HoeffdingRule h;
  EXPECT_DOUBLE_EQ(n_bar(EpsilonSchedule::zero(), 100, 0.5, h), 99.0);
  EXPECT_DOUBLE_EQ(n_bar(EpsilonSchedule::zero(), 100, 0.0, h), 99.0);
  const double t = 1e5;
  EXPECT_NEAR(n_bar(EpsilonSchedule::power(0.25), 100000, 0.0, h), 6.0 * std::log(t) * std::sqrt(t), 1e-6);
  EXPECT_NEAR(n_bar(EpsilonSchedule::power(0.25), 100000, 0.0, h), 21844.24, 0.01);
  EXPECT_NEAR(n_bar(EpsilonSchedule::power(0.25), 100000, 0.5, h), 6.0 * std::log(t) / 0.25, 1e-9);
  EXPECT_NEAR(n_bar(EpsilonSchedule::power(0.25), 100000, 0.5, h), 276.3, 0.05);
}

TEST(NBar, ScanMatchesClosedFormOnLogGrid) {
  const HoeffdingRule h;
  const BernsteinRule b;
  for (const auto& s : {EpsilonSchedule::power(0.25), EpsilonSchedule::zero(), EpsilonSchedule::inv_log(),
                        EpsilonSchedule::fixed_budget(300.0, 3)}) {
    for (std::uint64_t horizon : {2ULL, 10ULL, 100ULL, 1000ULL, 10000ULL, 100000ULL, 1000000ULL}) {
      for (double delta : {0.0, 0.1, 0.5}) {
        const double scan = n_bar_scan(s, horizon, delta, h);
        const auto closed = n_bar_closed_form(s, horizon, delta, h);
        ASSERT_TRUE(closed.has_value());
        EXPECT_NEAR(scan, *closed, 1e-9 * std::max(1.0, scan)) << s.describe() << " " << horizon << " " << delta;
        if (s.nonincreasing()) {
          EXPECT_NEAR(n_bar_scan(s, horizon, delta, b, 0.1875), *n_bar_closed_form(s, horizon, delta, b, 0.1875),
                      1e-9 * std::max(1.0, scan));
        }
      }
    }
  }
  EXPECT_FALSE(n_bar_closed_form(EpsilonSchedule::from_budget_bernstein(BudgetFn::linear(0.5), 2), 100, 0.0, h));
}

TEST(NBar, BudgetCompliance) {
  const HoeffdingRule h;
  for (const auto& fn : {BudgetFn::linear(0.1), BudgetFn::constant(500.0), BudgetFn::power(5.0, 0.6)}) {
    const auto s = EpsilonSchedule::from_budget_hoeffding(fn, 4);
    for (std::uint64_t horizon : {10ULL, 100ULL, 1000ULL, 10000ULL, 100000ULL}) {
      EXPECT_LE(n_bar(s, horizon, 0.0, h), fn(static_cast<double>(horizon)) / 4.0 + 1e-9) << fn.describe();
    }
  }
}

TEST(NBar, AlmostSureCapUsesAlmostSureRequirement) {
  const HoeffdingRule h;
  EXPECT_NEAR(n_bar_as(EpsilonSchedule::power(0.25), 100000, h) + 1.0, 21845.24, 0.01);
  const AnyRule any = BernsteinRule{};
  EXPECT_GE(n_bar_as(EpsilonSchedule::power(0.25), 1000, any), n_bar(EpsilonSchedule::power(0.25), 1000, 0.0, any));
}

TEST(EpsilonSum, ExactSum) {
  double brute = 0.0;
  for (int t = 1; t <= 256; ++t) brute += std::pow(t, -0.25);
  EXPECT_NEAR(epsilon_sum(EpsilonSchedule::power(0.25), 256), brute, 1e-12);
  // Integral sandwich: sum lies in [4/3 (257^{3/4} - 1), 1 + 4/3 (256^{3/4} - 1)].
  EXPECT_GE(brute, 4.0 / 3.0 * (std::pow(257.0, 0.75) - 1.0));
  EXPECT_LE(brute, 1.0 + 4.0 / 3.0 * (std::pow(256.0, 0.75) - 1.0));
  EXPECT_EQ(epsilon_sum(EpsilonSchedule::zero(), 1000), 0.0);
  EXPECT_NEAR(epsilon_sum(EpsilonSchedule::inv_log(), 3), 1.0 / std::log(2.0) + 1.0 / std::log(3.0), 1e-15);
}

TEST(NumberFormat, RoundTripsAndStaysPlain) {
  EXPECT_EQ(detail::format_number(100000.0), "100000");
  EXPECT_EQ(detail::format_number(0.25), "0.25");
  EXPECT_EQ(detail::format_number(0.0), "0");
  for (double v : {1.0 / 3.0, 664.88, 1e-7, 2.5e20, -0.1}) {
    EXPECT_EQ(std::stod(detail::format_number(v)), v);
  }
}
