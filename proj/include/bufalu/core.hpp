#pragma once

#include <algorithm>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace bufalu {

using ArmIndex = std::size_t;

/// Reward model of a single arm.
struct ArmModel {
  enum class Kind { bernoulli, gaussian_unit, deterministic };

  Kind kind = Kind::bernoulli;
  double param = 0.0;

  static ArmModel bernoulli(double p) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw std::invalid_argument("bernoulli parameter must lie in [0,1]");
    }
    return {Kind::bernoulli, p};
  }

  static ArmModel gaussian_unit(double mean) { return {Kind::gaussian_unit, mean}; }

  static ArmModel deterministic(double value) {
    if (!(value >= 0.0 && value <= 1.0)) {
      throw std::invalid_argument("deterministic reward must lie in [0,1]");
    }
    return {Kind::deterministic, value};
  }

  double mean() const { return param; }

  /// Reward variance of the model (0 for deterministic arms).
  double variance() const {
    switch (kind) {
      case Kind::bernoulli:
        return param * (1.0 - param);
      case Kind::gaussian_unit:
        return 1.0;
      case Kind::deterministic:
        return 0.0;
    }
    return 0.0;
  }

  bool bounded_unit() const { return kind != Kind::gaussian_unit; }

  friend bool operator==(const ArmModel&, const ArmModel&) = default;
};

/// A K-armed instance together with its gap structure.
class BanditInstance {
 public:
  explicit BanditInstance(std::vector<ArmModel> arms) : arms_(std::move(arms)) {
    if (arms_.size() < 2) {
      throw std::invalid_argument("a bandit instance needs at least two arms");
    }
    mu_star_ = arms_.front().mean();
    for (const auto& arm : arms_) mu_star_ = std::max(mu_star_, arm.mean());

    gaps_.reserve(arms_.size());
    for (ArmIndex a = 0; a < arms_.size(); ++a) {
      const double gap = mu_star_ - arms_[a].mean();
      gaps_.push_back(gap);
      if (gap == 0.0) {
        optimal_.push_back(a);
      } else {
        delta_max_ = std::max(delta_max_, gap);
        delta_min_ = delta_min_ ? std::min(*delta_min_, gap) : gap;
      }
    }
  }

  std::size_t size() const { return arms_.size(); }
  const std::vector<ArmModel>& arms() const { return arms_; }
  const ArmModel& arm(ArmIndex a) const { return arms_.at(a); }

  double mu_star() const { return mu_star_; }
  const std::vector<double>& gaps() const { return gaps_; }
  double gap(ArmIndex a) const { return gaps_.at(a); }
  const std::vector<ArmIndex>& optimal_set() const { return optimal_; }
  bool unique_optimal() const { return optimal_.size() == 1; }
  bool is_optimal(ArmIndex a) const { return gaps_.at(a) == 0.0; }

  /// Smallest positive gap; absent when every arm is optimal.
  std::optional<double> delta_min() const { return delta_min_; }
  double delta_max() const { return delta_max_; }

  /// Largest mean among suboptimal arms (absent when all arms are optimal).
  std::optional<double> best_suboptimal_mean() const {
    std::optional<double> best;
    for (ArmIndex a = 0; a < arms_.size(); ++a) {
      if (gaps_[a] > 0.0) best = best ? std::max(*best, arms_[a].mean()) : arms_[a].mean();
    }
    return best;
  }

  bool all_bounded_unit() const {
    return std::all_of(arms_.begin(), arms_.end(), [](const ArmModel& m) { return m.bounded_unit(); });
  }

 private:
  std::vector<ArmModel> arms_;
  double mu_star_ = 0.0;
  std::vector<double> gaps_;
  std::vector<ArmIndex> optimal_;
  std::optional<double> delta_min_;
  double delta_max_ = 0.0;
};

/// Sufficient statistics of one episode after `t` rounds.
struct RunState {
  std::uint64_t t = 0;
  std::vector<std::uint64_t> plays;
  std::vector<std::uint64_t> queries;
  std::vector<double> sum;
  std::vector<double> sum_sq;
  std::uint64_t total_queries = 0;

  RunState() = default;
  explicit RunState(std::size_t arms)
      : plays(arms, 0), queries(arms, 0), sum(arms, 0.0), sum_sq(arms, 0.0) {}

  std::size_t arms() const { return plays.size(); }

  void check_arm(ArmIndex a) const {
    if (a >= plays.size()) throw std::out_of_range("arm index out of range");
  }
};

/// Records one round. Unqueried rewards are never observed, so they leave
/// the reward sums untouched.
inline void update(RunState& state, ArmIndex a, double reward, bool queried) {
  state.check_arm(a);
  ++state.t;
  ++state.plays[a];
  if (queried) {
    ++state.queries[a];
    ++state.total_queries;
    state.sum[a] += reward;
    state.sum_sq[a] += reward * reward;
  }
}

inline RunState updated(RunState state, ArmIndex a, double reward, bool queried) {
  update(state, a, reward, queried);
  return state;
}

/// Mean of the observed rewards of arm `a`; 0 before the first query.
inline double empirical_mean(const RunState& state, ArmIndex a) {
  state.check_arm(a);
  const auto n = state.queries[a];
  return n == 0 ? 0.0 : state.sum[a] / static_cast<double>(n);
}

/// Unbiased sample variance of the observed rewards of arm `a`; 0 below two
/// observations.
inline double empirical_variance(const RunState& state, ArmIndex a) {
  state.check_arm(a);
  const auto n = state.queries[a];
  if (n < 2) return 0.0;
  const double nd = static_cast<double>(n);
  const double mean = state.sum[a] / nd;
  const double v = (nd / (nd - 1.0)) * (state.sum_sq[a] / nd - mean * mean);
  return std::max(0.0, v);
}

}  // namespace bufalu
