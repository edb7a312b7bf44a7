#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufalu/confidence.hpp"
#include "bufalu/core.hpp"

namespace bufalu {

enum class PolicyKind { bufalu, bufau, cbm, greedy };

inline PolicyKind parse_policy(const std::string& name) {
  if (name == "bufalu") return PolicyKind::bufalu;
  if (name == "bufau") return PolicyKind::bufau;
  if (name == "cbm") return PolicyKind::cbm;
  if (name == "greedy") return PolicyKind::greedy;
  throw std::invalid_argument("unknown policy: " + name);
}

inline const char* policy_name(PolicyKind p) {
  switch (p) {
    case PolicyKind::bufalu:
      return "bufalu";
    case PolicyKind::bufau:
      return "bufau";
    case PolicyKind::cbm:
      return "cbm";
    case PolicyKind::greedy:
      return "greedy";
  }
  return "?";
}

struct Decision {
  struct Diagnostics {
    ArmIndex l = 0;
    std::optional<ArmIndex> u;
    std::optional<ArmIndex> c;
    /// BuFAU only: argmax of UCB over arms other than l, used by its gate.
    std::optional<ArmIndex> u_rest;
    bool separated = false;
  };

  ArmIndex arm = 0;
  bool query = false;
  Diagnostics diagnostics;
};

/// Ties break to the lowest index unless a generator is supplied, in which
/// case the winner is uniform over the tied set.
class TieBreaker {
 public:
  TieBreaker() = default;
  explicit TieBreaker(std::mt19937_64* rng) : rng_(rng) {}

  bool randomized() const { return rng_ != nullptr; }

  /// Argmax of `value(a)` over `a` in [0, n) with a != skip.
  template <typename F>
  ArmIndex argmax(std::size_t n, F&& value, std::optional<ArmIndex> skip = std::nullopt) const {
    std::optional<ArmIndex> best;
    double best_value = 0.0;
    std::uint64_t ties = 0;
    for (ArmIndex a = 0; a < n; ++a) {
      if (skip && *skip == a) continue;
      const double v = value(a);
      if (!best || v > best_value) {
        best = a;
        best_value = v;
        ties = 1;
      } else if (v == best_value && rng_) {
        ++ties;
        if (std::uniform_int_distribution<std::uint64_t>(0, ties - 1)(*rng_) == 0) best = a;
      }
    }
    if (!best) throw std::logic_error("argmax over an empty arm set");
    return *best;
  }

  /// Picks between two candidates with equal score: lower index, or a coin flip.
  ArmIndex pick(ArmIndex x, ArmIndex y) const {
    if (!rng_) return std::min(x, y);
    return std::bernoulli_distribution(0.5)(*rng_) ? x : y;
  }

 private:
  std::mt19937_64* rng_ = nullptr;
};

using Intervals = std::span<const Interval>;

/// BuFALU arm choice and query gate on precomputed round-t intervals.
inline Decision bufalu_choose(Intervals ci, double eps, const TieBreaker& tie = {}) {
  const std::size_t k = ci.size();
  Decision d;
  const ArmIndex l = tie.argmax(k, [&](ArmIndex a) { return ci[a].lcb; });
  const ArmIndex u = tie.argmax(k, [&](ArmIndex a) { return ci[a].ucb; }, l);
  const double wl = ci[l].width();
  const double wu = ci[u].width();
  const ArmIndex c = wu > wl ? u : (wl > wu ? l : tie.pick(u, l));

  d.diagnostics.l = l;
  d.diagnostics.u = u;
  d.diagnostics.c = c;
  d.diagnostics.separated = ci[u].ucb <= ci[l].lcb;
  if (d.diagnostics.separated || ci[c].ucb - ci[l].lcb <= eps) {
    d.arm = l;
    d.query = false;
  } else {
    d.arm = c;
    d.query = true;
  }
  return d;
}

/// BuFAU: like BuFALU but plays the global UCB leader when querying.
inline Decision bufau_choose(Intervals ci, double eps, const TieBreaker& tie = {}) {
  const std::size_t k = ci.size();
  Decision d;
  const ArmIndex l = tie.argmax(k, [&](ArmIndex a) { return ci[a].lcb; });
  const ArmIndex u = tie.argmax(k, [&](ArmIndex a) { return ci[a].ucb; });
  const ArmIndex rest = tie.argmax(k, [&](ArmIndex a) { return ci[a].ucb; }, l);

  d.diagnostics.l = l;
  d.diagnostics.u = u;
  d.diagnostics.u_rest = rest;
  d.diagnostics.separated = ci[rest].ucb <= ci[l].lcb;
  if (d.diagnostics.separated || ci[u].ucb - ci[l].lcb <= eps) {
    d.arm = l;
    d.query = false;
  } else {
    d.arm = u;
    d.query = true;
  }
  return d;
}

/// CBM-UCB: always plays the UCB leader, queries while its width exceeds eps.
inline Decision cbm_choose(Intervals ci, double eps, const TieBreaker& tie = {}) {
  const std::size_t k = ci.size();
  Decision d;
  const ArmIndex u = tie.argmax(k, [&](ArmIndex a) { return ci[a].ucb; });
  d.diagnostics.l = tie.argmax(k, [&](ArmIndex a) { return ci[a].lcb; });
  d.diagnostics.u = u;
  d.arm = u;
  d.query = ci[u].width() > eps;
  return d;
}

/// Effective budget of the greedy baseline, 6 K ln t / eps^2 + K; +inf at eps = 0.
inline double greedy_effective_budget(std::uint64_t t, std::size_t arms, double eps) {
  if (eps <= 0.0) return kInf;
  const double k = static_cast<double>(arms);
  return 6.0 * k * std::log(static_cast<double>(t)) / (eps * eps) + k;
}

/// Greedy: queries the UCB leader until the effective budget is spent, then
/// exploits the best empirical mean without querying.
inline Decision greedy_choose(std::uint64_t t, const RunState& state, Intervals ci, double eps,
                              const TieBreaker& tie = {}) {
  const std::size_t k = ci.size();
  Decision d;
  d.diagnostics.l = tie.argmax(k, [&](ArmIndex a) { return ci[a].lcb; });
  const double budget = greedy_effective_budget(t, k, eps);
  if (static_cast<double>(state.total_queries) > budget - 1.0) {
    d.arm = tie.argmax(k, [&](ArmIndex a) { return empirical_mean(state, a); });
    d.query = false;
  } else {
    const ArmIndex u = tie.argmax(k, [&](ArmIndex a) { return ci[a].ucb; });
    d.diagnostics.u = u;
    d.arm = u;
    d.query = true;
  }
  return d;
}

/// Forced initialisation: round t <= K plays arm t-1 (0-based) and queries.
inline Decision initial_decision(std::uint64_t t) {
  Decision d;
  d.arm = static_cast<ArmIndex>(t - 1);
  d.query = true;
  d.diagnostics.l = d.arm;
  return d;
}

/// Policy decision at round t from round-t intervals (computed from state after t-1 rounds).
inline Decision choose(PolicyKind policy, std::uint64_t t, const RunState& state, Intervals ci, double eps,
                       const TieBreaker& tie = {}) {
  if (t <= ci.size()) return initial_decision(t);
  switch (policy) {
    case PolicyKind::bufalu:
      return bufalu_choose(ci, eps, tie);
    case PolicyKind::bufau:
      return bufau_choose(ci, eps, tie);
    case PolicyKind::cbm:
      return cbm_choose(ci, eps, tie);
    case PolicyKind::greedy:
      return greedy_choose(t, state, ci, eps, tie);
  }
  throw std::logic_error("unhandled policy");
}

template <ConfidenceRule Rule>
std::vector<Interval> round_intervals(const RunState& state, const Rule& rule, std::uint64_t t) {
  const double log_t = std::log(static_cast<double>(t));
  std::vector<Interval> ci(state.arms());
  for (ArmIndex a = 0; a < ci.size(); ++a) ci[a] = rule.interval(state, a, log_t);
  return ci;
}

template <ConfidenceRule Rule>
Decision decide(PolicyKind policy, std::uint64_t t, const RunState& state, const Rule& rule, double eps,
                const TieBreaker& tie = {}) {
  if (t == 0) throw std::invalid_argument("rounds are numbered from 1");
  const auto ci = round_intervals(state, rule, t);
  return choose(policy, t, state, ci, eps, tie);
}

template <ConfidenceRule Rule>
Decision bufalu_decide(std::uint64_t t, const RunState& state, const Rule& rule, double eps) {
  return decide(PolicyKind::bufalu, t, state, rule, eps);
}

template <ConfidenceRule Rule>
Decision bufau_decide(std::uint64_t t, const RunState& state, const Rule& rule, double eps) {
  return decide(PolicyKind::bufau, t, state, rule, eps);
}

template <ConfidenceRule Rule>
Decision cbm_decide(std::uint64_t t, const RunState& state, const Rule& rule, double eps) {
  return decide(PolicyKind::cbm, t, state, rule, eps);
}

template <ConfidenceRule Rule>
Decision greedy_decide(std::uint64_t t, const RunState& state, const Rule& rule, double eps) {
  return decide(PolicyKind::greedy, t, state, rule, eps);
}

}  // namespace bufalu
