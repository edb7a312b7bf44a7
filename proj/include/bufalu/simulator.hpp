#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>
#include <vector>

#include "bufalu/confidence.hpp"
#include "bufalu/core.hpp"
#include "bufalu/environment.hpp"
#include "bufalu/policies.hpp"
#include "bufalu/schedules.hpp"

namespace bufalu {

/// Sorted, de-duplicated grid of `count` log-spaced rounds in [1, T], always including T.
inline std::vector<std::uint64_t> log_checkpoints(std::uint64_t horizon, std::size_t count = 200) {
  std::vector<std::uint64_t> grid;
  if (horizon == 0) return grid;
  const double log_t = std::log(static_cast<double>(horizon));
  for (std::size_t i = 0; i < count; ++i) {
    const double frac = count == 1 ? 1.0 : static_cast<double>(i) / static_cast<double>(count - 1);
    auto t = static_cast<std::uint64_t>(std::llround(std::exp(frac * log_t)));
    grid.push_back(std::clamp<std::uint64_t>(t, 1, horizon));
  }
  grid.push_back(horizon);
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

struct Checkpoint {
  std::uint64_t t = 0;
  double regret = 0.0;
  std::uint64_t queries = 0;
  std::vector<std::uint64_t> arm_queries;
};

struct ViolationCounters {
  /// Query rounds with CI_t(a_t) <= eps(t) (BuFALU/BuFAU).
  std::uint64_t query_width = 0;
  /// Unqueried rounds inside the good event with gap(a_t) > eps(t).
  std::uint64_t gap_under_good_event = 0;
  /// Same, outside the good event; permitted, only counted.
  std::uint64_t gap_outside_good_event = 0;
  /// Checkpoints where some n_t(a) > N-bar^as(t) + 1 (BuFALU).
  std::uint64_t per_arm_cap = 0;
  /// Checkpoints where total queries exceed B(t) + K under a budget schedule.
  std::uint64_t budget_cap = 0;
};

struct EpisodeTrace {
  PolicyKind policy = PolicyKind::bufalu;
  std::uint64_t seed = 0;
  std::uint64_t horizon = 0;
  std::vector<Checkpoint> checkpoints;
  ViolationCounters violations;
  std::vector<std::uint64_t> plays;
  std::vector<std::uint64_t> queries;
  double regret = 0.0;
  std::uint64_t total_queries = 0;

  /// Violations of assertions that must never fire for this policy.
  std::uint64_t hard_violations() const {
    std::uint64_t n = violations.budget_cap;
    if (policy == PolicyKind::bufalu || policy == PolicyKind::bufau) n += violations.query_width;
    if (policy == PolicyKind::bufalu) n += violations.gap_under_good_event + violations.per_arm_cap;
    return n;
  }
};

struct EpisodeSpec {
  PolicyKind policy = PolicyKind::bufalu;
  std::uint64_t horizon = 0;
  std::uint64_t seed = 0;
  std::uint64_t experiment_id = 0;
  std::vector<std::uint64_t> checkpoints;
  bool random_tie_break = false;
};

/// Whether every true mean lies in its round-t interval.
template <ConfidenceRule Rule>
bool good_event_holds(const BanditInstance& instance, const RunState& state, const Rule& rule, std::uint64_t t) {
  if (t == 0) throw std::invalid_argument("rounds are numbered from 1");
  const double log_t = std::log(static_cast<double>(t));
  for (ArmIndex a = 0; a < instance.size(); ++a) {
    if (!rule.interval(state, a, log_t).contains(instance.arm(a).mean())) return false;
  }
  return true;
}

inline bool good_event_holds(const BanditInstance& instance, const RunState& state, const AnyRule& rule,
                             std::uint64_t t) {
  return std::visit([&](const auto& r) { return good_event_holds(instance, state, r, t); }, rule);
}

template <ConfidenceRule Rule>
EpisodeTrace run_episode(const BanditInstance& instance, const EpsilonSchedule& schedule, const Rule& rule,
                         const EpisodeSpec& spec) {
  const std::size_t k = instance.size();
  const std::uint64_t horizon = spec.horizon;
  if (horizon < k) throw std::invalid_argument("horizon must be at least the number of arms");
  for (auto c : spec.checkpoints) {
    if (c < 1 || c > horizon) throw std::invalid_argument("checkpoint outside [1, T]");
  }
  std::vector<std::uint64_t> grid = spec.checkpoints;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());

  EpisodeTrace trace;
  trace.policy = spec.policy;
  trace.seed = spec.seed;
  trace.horizon = horizon;
  trace.checkpoints.reserve(grid.size());

  RunState state(k);
  EpisodeRng rng(spec.experiment_id, spec.seed, k);
  const TieBreaker tie = spec.random_tie_break ? TieBreaker(&rng.aux()) : TieBreaker();
  std::vector<Interval> ci(k);
  const auto& gaps = instance.gaps();
  const bool width_checked = spec.policy == PolicyKind::bufalu || spec.policy == PolicyKind::bufau;
  const bool cap_checked = spec.policy == PolicyKind::bufalu;
  const bool budgeted = schedule.has_budget();
  double regret = 0.0;
  double n_as_running = 0.0;
  std::size_t next_cp = 0;

  for (std::uint64_t t = 1; t <= horizon; ++t) {
    Decision d;
    if (t <= k) {
      d = initial_decision(t);
    } else {
      const double td = static_cast<double>(t);
      const double log_t = std::log(td);
      const double eps = schedule.eval(td);
      for (ArmIndex a = 0; a < k; ++a) ci[a] = rule.interval(state, a, log_t);
      d = choose(spec.policy, t, state, ci, eps, tie);

      if (d.query) {
        if (width_checked && !(ci[d.arm].width() > eps)) ++trace.violations.query_width;
      } else if (gaps[d.arm] > eps) {
        bool good = true;
        for (ArmIndex a = 0; a < k && good; ++a) good = ci[a].contains(instance.arm(a).mean());
        if (good) {
          ++trace.violations.gap_under_good_event;
        } else {
          ++trace.violations.gap_outside_good_event;
        }
      }
      if (cap_checked) n_as_running = std::max(n_as_running, static_cast<double>(rule.n_as_value(td, log_t, eps)));
    }

    const double reward = sample_reward(instance, d.arm, rng);
    update(state, d.arm, reward, d.query);
    regret += gaps[d.arm];

    if (next_cp < grid.size() && grid[next_cp] == t) {
      ++next_cp;
      trace.checkpoints.push_back({t, regret, state.total_queries, state.queries});
      if (cap_checked) {
        const double cap = n_as_running + 1.0;
        for (ArmIndex a = 0; a < k; ++a) {
          if (static_cast<double>(state.queries[a]) > cap * (1.0 + 1e-12)) {
            ++trace.violations.per_arm_cap;
            break;
          }
        }
      }
      if (budgeted) {
        const double cap = *schedule.budget(static_cast<double>(t)) + static_cast<double>(k);
        if (static_cast<double>(state.total_queries) > cap * (1.0 + 1e-12)) ++trace.violations.budget_cap;
      }
    }
  }

  trace.plays = state.plays;
  trace.queries = state.queries;
  trace.regret = regret;
  trace.total_queries = state.total_queries;
  return trace;
}

inline EpisodeTrace run_episode(const BanditInstance& instance, const EpsilonSchedule& schedule, const AnyRule& rule,
                                const EpisodeSpec& spec) {
  return std::visit([&](const auto& r) { return run_episode(instance, schedule, r, spec); }, rule);
}

/// Reg^q(T) = pseudo-regret + c * total queries.
inline double cost_aware_regret(const EpisodeTrace& trace, double cost) {
  if (cost < 0.0) throw std::invalid_argument("query cost must be nonnegative");
  return trace.regret + cost * static_cast<double>(trace.total_queries);
}

struct SummaryStats {
  double mean = 0.0;
  double std = 0.0;
  double q90 = 0.0;
  double min = 0.0;
  double max = 0.0;
  std::size_t count = 0;
};

/// Mean, sample std (n-1 denominator, 0 for one value), 90th percentile by
/// linear interpolation between order statistics, min and max. Summation runs
/// in input order.
inline SummaryStats summarize(const std::vector<double>& values) {
  if (values.empty()) throw std::invalid_argument("cannot summarise an empty sample");
  SummaryStats s;
  s.count = values.size();
  double total = 0.0;
  for (double v : values) total += v;
  s.mean = total / static_cast<double>(values.size());
  if (values.size() > 1) {
    double ss = 0.0;
    for (double v : values) ss += (v - s.mean) * (v - s.mean);
    s.std = std::sqrt(ss / static_cast<double>(values.size() - 1));
  }
  std::vector<double> sorted = values;
  std::sort(sorted.begin(), sorted.end());
  s.min = sorted.front();
  s.max = sorted.back();
  const double pos = 0.9 * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  s.q90 = sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
  return s;
}

struct TrajectoryPoint {
  std::uint64_t t = 0;
  double regret = 0.0;
  double queries = 0.0;
};

struct BatchResult {
  std::vector<EpisodeTrace> episodes;
  SummaryStats regret;
  SummaryStats queries;
  std::vector<TrajectoryPoint> mean_trajectory;
  std::uint64_t hard_violations = 0;

  std::vector<double> final_regrets() const {
    std::vector<double> v;
    for (const auto& e : episodes) v.push_back(e.regret);
    return v;
  }
  std::vector<double> final_queries() const {
    std::vector<double> v;
    for (const auto& e : episodes) v.push_back(static_cast<double>(e.total_queries));
    return v;
  }
  /// Mean over episodes of n_T(a).
  std::vector<double> mean_arm_queries() const {
    std::vector<double> m(episodes.front().queries.size(), 0.0);
    for (const auto& e : episodes) {
      for (std::size_t a = 0; a < m.size(); ++a) m[a] += static_cast<double>(e.queries[a]);
    }
    for (auto& x : m) x /= static_cast<double>(episodes.size());
    return m;
  }
};

struct BatchSpec {
  PolicyKind policy = PolicyKind::bufalu;
  std::uint64_t horizon = 0;
  std::vector<std::uint64_t> seeds;
  std::uint64_t experiment_id = 0;
  std::vector<std::uint64_t> checkpoints;
  bool random_tie_break = false;
  unsigned jobs = 1;
};

/// Runs one episode per seed (in parallel when jobs > 1) and reduces in seed order.
inline BatchResult run_batch(const BanditInstance& instance, const EpsilonSchedule& schedule, const AnyRule& rule,
                             const BatchSpec& spec) {
  if (spec.seeds.empty()) throw std::invalid_argument("run_batch needs at least one seed");
  BatchResult result;
  result.episodes.resize(spec.seeds.size());

  auto run_one = [&](std::size_t i) {
    EpisodeSpec es{spec.policy, spec.horizon, spec.seeds[i], spec.experiment_id, spec.checkpoints,
                   spec.random_tie_break};
    result.episodes[i] = run_episode(instance, schedule, rule, es);
  };

  const unsigned jobs = std::max(1u, std::min<unsigned>(spec.jobs, static_cast<unsigned>(spec.seeds.size())));
  if (jobs == 1) {
    for (std::size_t i = 0; i < spec.seeds.size(); ++i) run_one(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> workers;
    for (unsigned j = 0; j < jobs; ++j) {
      workers.emplace_back([&] {
        for (std::size_t i = next++; i < spec.seeds.size(); i = next++) {
          try {
            run_one(i);
          } catch (...) {
            std::lock_guard lock(failure_mutex);
            if (!failure) failure = std::current_exception();
          }
        }
      });
    }
    for (auto& w : workers) w.join();
    if (failure) std::rethrow_exception(failure);
  }

  result.regret = summarize(result.final_regrets());
  result.queries = summarize(result.final_queries());
  for (const auto& e : result.episodes) result.hard_violations += e.hard_violations();

  const auto& first = result.episodes.front().checkpoints;
  result.mean_trajectory.resize(first.size());
  for (std::size_t c = 0; c < first.size(); ++c) {
    TrajectoryPoint p{first[c].t, 0.0, 0.0};
    for (const auto& e : result.episodes) {
      p.regret += e.checkpoints[c].regret;
      p.queries += static_cast<double>(e.checkpoints[c].queries);
    }
    p.regret /= static_cast<double>(result.episodes.size());
    p.queries /= static_cast<double>(result.episodes.size());
    result.mean_trajectory[c] = p;
  }
  return result;
}

inline std::vector<std::uint64_t> seed_range(std::uint64_t base, std::size_t count) {
  std::vector<std::uint64_t> seeds(count);
  for (std::size_t i = 0; i < count; ++i) seeds[i] = base + i;
  return seeds;
}

}  // namespace bufalu
