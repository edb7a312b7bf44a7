#pragma once

#include <cmath>
#include <concepts>
#include <limits>
#include <stdexcept>
#include <string>
#include <variant>

#include "bufalu/core.hpp"

namespace bufalu {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// A confidence interval on the extended real line.
struct Interval {
  double lcb = -kInf;
  double ucb = kInf;

  double width() const { return ucb - lcb; }
  bool contains(double x) const { return lcb <= x && x <= ucb; }
};

/// Hoeffding intervals for rewards in [0,1]: half-width sqrt(3 ln t / (2n)).
struct HoeffdingRule {
  static constexpr const char* name() { return "hoeffding"; }

  /// Interval for round `t` given ln(t), from the statistics after t-1 rounds.
  Interval interval(const RunState& state, ArmIndex a, double log_t) const {
    const auto n = state.queries[a];
    if (n == 0) return {};
    const double nd = static_cast<double>(n);
    const double mean = state.sum[a] / nd;
    const double w = std::sqrt(1.5 * log_t / nd);
    return {mean - w, mean + w};
  }

  Interval bounds(const RunState& state, ArmIndex a, std::uint64_t t) const {
    state.check_arm(a);
    return interval(state, a, std::log(static_cast<double>(t)));
  }

  /// min{6 ln t / mu^2, t-1}; t-1 at mu = 0.
  static double n_as(double t, double mu) { return n_as(t, std::log(t), mu); }
  static double n_as(double t, double log_t, double mu) {
    if (mu <= 0.0) return t - 1.0;
    return std::min(6.0 * log_t / (mu * mu), t - 1.0);
  }

  double n_good(double t, double mu, double /*variance*/ = 0.25) const { return n_as(t, mu); }
  double n_as_value(double t, double mu) const { return n_as(t, mu); }
  double n_as_value(double t, double log_t, double mu) const { return n_as(t, log_t, mu); }

  /// C(T) = 2K.
  static double failure_budget(double /*T*/, std::size_t arms) { return 2.0 * static_cast<double>(arms); }
};

inline double hoeffding_n_good(double t, double mu) { return HoeffdingRule::n_as(t, mu); }
inline double hoeffding_n_as(double t, double mu) { return HoeffdingRule::n_as(t, mu); }

inline Interval hoeffding_bounds(const RunState& state, ArmIndex a, std::uint64_t t) {
  return HoeffdingRule{}.bounds(state, a, t);
}

/// Raw sample requirement for the Bernstein intervals:
/// min{24 V ln t/mu^2 + 52 ln t/mu + 1, t-1}.
inline double bernstein_n_good(double t, double mu, double variance) {
  if (mu <= 0.0) return t - 1.0;
  const double l = std::log(t);
  return std::min(24.0 * variance * l / (mu * mu) + 52.0 * l / mu + 1.0, t - 1.0);
}

/// Almost-sure sample requirement for the Bernstein intervals, variant 1 or 2.
inline double bernstein_n_as(double t, double log_t, double mu, int variant) {
  if (variant != 1 && variant != 2) throw std::invalid_argument("bernstein n_as variant must be 1 or 2");
  if (mu <= 0.0) return t - 1.0;
  const double l = log_t;
  double n = 0.0;
  if (variant == 1) {
    n = 6.0 * l / (mu * mu) + 28.0 * l / mu + 1.0;
  } else {
    const double a = 1.5 * l / (mu * mu);
    const double root = std::sqrt(a) + std::sqrt(a + 14.0 * l / mu);
    n = root * root + 1.0;
  }
  return std::min(n, t - 1.0);
}

inline double bernstein_n_as(double t, double mu, int variant) {
  return bernstein_n_as(t, std::log(t), mu, variant);
}

/// Empirical-Bernstein intervals: r ± [sqrt(6 V ln t / n) + 7 ln t / (n-1)].
struct BernsteinRule {
  int as_variant = 2;

  static constexpr const char* name() { return "bernstein"; }

  Interval interval(const RunState& state, ArmIndex a, double log_t) const {
    const auto n = state.queries[a];
    if (n <= 1) return {};
    const double nd = static_cast<double>(n);
    const double mean = state.sum[a] / nd;
    const double var = std::max(0.0, (nd / (nd - 1.0)) * (state.sum_sq[a] / nd - mean * mean));
    const double w = std::sqrt(6.0 * var * log_t / nd) + 7.0 * log_t / (nd - 1.0);
    return {mean - w, mean + w};
  }

  Interval bounds(const RunState& state, ArmIndex a, std::uint64_t t) const {
    state.check_arm(a);
    return interval(state, a, std::log(static_cast<double>(t)));
  }

  double n_as_value(double t, double mu) const { return bernstein_n_as(t, mu, as_variant); }
  double n_as_value(double t, double log_t, double mu) const { return bernstein_n_as(t, log_t, mu, as_variant); }

  /// Requirement under the good event, clipped to the almost-sure one so that
  /// n_good <= n_as always holds.
  double n_good(double t, double mu, double variance) const {
    return std::min(bernstein_n_good(t, mu, variance), n_as_value(t, mu));
  }

  /// C(T) = 12K.
  static double failure_budget(double /*T*/, std::size_t arms) { return 12.0 * static_cast<double>(arms); }
};

inline Interval bernstein_bounds(const RunState& state, ArmIndex a, std::uint64_t t) {
  return BernsteinRule{}.bounds(state, a, t);
}

template <typename R>
concept ConfidenceRule = requires(const R& rule, const RunState& s, ArmIndex a, double x) {
  { rule.interval(s, a, x) } -> std::same_as<Interval>;
  { rule.n_good(x, x, x) } -> std::convertible_to<double>;
  { rule.n_as_value(x, x) } -> std::convertible_to<double>;
  { rule.n_as_value(x, x, x) } -> std::convertible_to<double>;
  { R::failure_budget(x, a) } -> std::convertible_to<double>;
};

using AnyRule = std::variant<HoeffdingRule, BernsteinRule>;

inline AnyRule parse_rule(const std::string& name) {
  if (name == "hoeffding") return HoeffdingRule{};
  if (name == "bernstein") return BernsteinRule{};
  throw std::invalid_argument("unknown confidence rule: " + name);
}

inline std::string rule_name(const AnyRule& rule) {
  return std::visit([](const auto& r) { return std::string(r.name()); }, rule);
}

/// Threshold n0 past which c1/sqrt(n) + c2/n < mu holds for every n > n0.
inline double sample_size_threshold(double c1, double c2, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("sample_size_threshold requires mu > 0");
  if (c1 < 0.0 || c2 < 0.0) throw std::invalid_argument("sample_size_threshold requires c1, c2 >= 0");
  return c1 * c1 / (mu * mu) + 2.0 * c2 / mu;
}

}  // namespace bufalu
