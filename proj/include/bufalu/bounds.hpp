#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufalu/confidence.hpp"
#include "bufalu/core.hpp"
#include "bufalu/schedules.hpp"

namespace bufalu {

/// Distribution family used for the lower-bound divergences.
enum class Family { bernoulli, gaussian_unit_variance };

inline Family parse_family(const std::string& name) {
  if (name == "bernoulli") return Family::bernoulli;
  if (name == "gaussian") return Family::gaussian_unit_variance;
  throw std::invalid_argument("unknown family: " + name);
}

inline const char* family_name(Family f) { return f == Family::bernoulli ? "bernoulli" : "gaussian"; }

/// Bernoulli arms only under the Bernoulli family; the Gaussian family takes
/// every arm by its mean.
inline void check_family(const BanditInstance& instance, Family family) {
  if (family != Family::bernoulli) return;
  for (const auto& arm : instance.arms()) {
    if (arm.kind != ArmModel::Kind::bernoulli) {
      throw std::invalid_argument("bernoulli family requires bernoulli arms");
    }
  }
}

/// kl(p, q) between Bernoulli(p) and Bernoulli(q), with 0 ln 0 = 0.
inline double kl_bernoulli(double p, double q) {
  if (!(p >= 0.0 && p <= 1.0 && q >= 0.0 && q <= 1.0)) {
    throw std::invalid_argument("kl_bernoulli arguments must lie in [0,1]");
  }
  if (p == q) return 0.0;
  if (q == 0.0 || q == 1.0) return kInf;
  double v = 0.0;
  if (p > 0.0) v += p * std::log(p / q);
  if (p < 1.0) v += (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
  return std::max(v, 0.0);
}

/// Kinf+(nu, mu): closest family member with mean above mu. `mean` is the
/// arm's mean (the Bernoulli parameter for the Bernoulli family).
inline double kinf_plus(Family family, double mean, double mu) {
  if (family == Family::gaussian_unit_variance) {
    const double d = std::max(0.0, mu - mean);
    return d * d / 2.0;
  }
  if (!(mean >= 0.0 && mean <= 1.0)) throw std::invalid_argument("bernoulli mean must lie in [0,1]");
  if (mu <= mean) return 0.0;
  if (mu >= 1.0) return kInf;
  return kl_bernoulli(mean, mu);
}

/// Kinf-(nu, mu): closest family member with mean below mu.
inline double kinf_minus(Family family, double mean, double mu) {
  if (family == Family::gaussian_unit_variance) {
    const double d = std::max(0.0, mean - mu);
    return d * d / 2.0;
  }
  if (!(mean >= 0.0 && mean <= 1.0)) throw std::invalid_argument("bernoulli mean must lie in [0,1]");
  if (mu >= mean) return 0.0;
  if (mu <= 0.0) return kInf;
  return kl_bernoulli(mean, mu);
}

/// 1/x with 1/0 = +inf and 1/inf = 0.
inline double inverse_divergence(double k) {
  if (k == 0.0) return kInf;
  if (std::isinf(k)) return 0.0;
  return 1.0 / k;
}

struct GoldenResult {
  double argmin = 0.0;
  double value = 0.0;
  int iterations = 0;
  /// Final bracket.
  double lo = 0.0;
  double hi = 0.0;
};

/// Golden-section minimisation of a unimodal function on [lo, hi].
template <typename F>
GoldenResult golden_section_minimize(F&& f, double lo, double hi, double tol = 1e-9, int max_iter = 200) {
  if (lo > hi) throw std::invalid_argument("golden_section_minimize: empty bracket");
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo;
  double b = hi;
  double c = b - inv_phi * (b - a);
  double d = a + inv_phi * (b - a);
  double fc = f(c);
  double fd = f(d);
  int it = 0;
  while (b - a > tol && it < max_iter) {
    ++it;
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  GoldenResult r;
  r.argmin = 0.5 * (a + b);
  r.value = f(r.argmin);
  r.iterations = it;
  r.lo = a;
  r.hi = b;
  // Endpoints can beat the interior when the optimum sits on the boundary.
  for (double x : {lo, hi}) {
    const double fx = f(x);
    if (fx < r.value) {
      r.value = fx;
      r.argmin = x;
    }
  }
  return r;
}

struct QueryFloor {
  /// Per-arm coefficient of ln T; absent for optimal arms of a multiple-optimal instance.
  std::vector<std::optional<double>> coefficients;
  /// Some optimal arm must be queried super-logarithmically.
  bool super_logarithmic = false;
};

/// Asymptotic per-arm query floors (multiples of ln T) for consistent strategies.
inline QueryFloor asymptotic_query_floor(const BanditInstance& instance, Family family) {
  check_family(instance, family);
  QueryFloor out;
  out.coefficients.resize(instance.size());
  const double mu_star = instance.mu_star();
  for (ArmIndex a = 0; a < instance.size(); ++a) {
    if (!instance.is_optimal(a)) {
      out.coefficients[a] = inverse_divergence(kinf_plus(family, instance.arm(a).mean(), mu_star));
    }
  }
  if (instance.unique_optimal()) {
    const ArmIndex best = instance.optimal_set().front();
    const double mu_s = *instance.best_suboptimal_mean();
    out.coefficients[best] = inverse_divergence(kinf_minus(family, instance.arm(best).mean(), mu_s));
    return out;
  }
  bool all_minus_zero = true;
  std::size_t plus_zero = 0;
  for (ArmIndex a : instance.optimal_set()) {
    const double m = instance.arm(a).mean();
    if (kinf_minus(family, m, mu_star) != 0.0) all_minus_zero = false;
    if (kinf_plus(family, m, mu_star) == 0.0) ++plus_zero;
  }
  out.super_logarithmic = all_minus_zero || plus_zero >= 2;
  return out;
}

struct PairedFloor {
  double value = 0.0;
  /// Threshold mu0 in [mu_s, mu*] where the bound is tightest.
  double separator = 0.0;
};

/// max over mu in [mu_s, mu*] of 1 / max{Kinf+(nu_a, mu), Kinf-(nu_a*, mu)}.
inline PairedFloor paired_separation_floor(const BanditInstance& instance, Family family, ArmIndex a) {
  check_family(instance, family);
  if (!instance.unique_optimal()) throw std::invalid_argument("paired floor needs a unique optimal arm");
  if (instance.is_optimal(a)) throw std::invalid_argument("paired floor needs a suboptimal arm");
  const ArmIndex best = instance.optimal_set().front();
  const double m_a = instance.arm(a).mean();
  const double m_star = instance.arm(best).mean();
  const double lo = *instance.best_suboptimal_mean();
  const double hi = m_star;
  auto worst = [&](double mu) {
    return std::max(kinf_plus(family, m_a, mu), kinf_minus(family, m_star, mu));
  };
  GoldenResult g = golden_section_minimize(worst, lo, hi);
  // The minimum of max{increasing, decreasing} is their crossing; bisecting
  // on the difference inside the final bracket recovers full precision.
  auto diff = [&](double mu) { return kinf_plus(family, m_a, mu) - kinf_minus(family, m_star, mu); };
  double x0 = g.lo;
  double x1 = g.hi;
  if (diff(x0) <= 0.0 && diff(x1) >= 0.0) {
    for (int i = 0; i < 200; ++i) {
      const double mid = 0.5 * (x0 + x1);
      if (mid <= x0 || mid >= x1) break;
      (diff(mid) <= 0.0 ? x0 : x1) = mid;
    }
    for (double x : {x0, x1}) {
      if (worst(x) < g.value) {
        g.value = worst(x);
        g.argmin = x;
      }
    }
  }
  if (family == Family::gaussian_unit_variance) {
    const double mid = m_a + instance.gap(a) / 2.0;
    if (mid >= lo && std::abs(g.argmin - mid) > 1e-6) {
      throw std::logic_error("gaussian separator is not the midpoint");
    }
  }
  return {inverse_divergence(g.value), g.argmin};
}

using QueryBudget = std::function<double(std::uint64_t)>;

/// sup{t : B(t) <= x}; 0 when B(1) > x, +inf when B(t) <= x up to `horizon_cap`.
inline double budget_inverse(const QueryBudget& budget, double x, std::uint64_t horizon_cap = 1ULL << 40) {
  if (budget(1) > x) return 0.0;
  std::uint64_t lo = 1;
  double b_lo = budget(1);
  std::uint64_t hi = 0;
  while (true) {
    const std::uint64_t probe = lo >= horizon_cap / 2 ? horizon_cap : lo * 2;
    const double b = budget(probe);
    if (b < b_lo) throw std::invalid_argument("budget is not monotone");
    if (b > x) {
      hi = probe;
      break;
    }
    if (probe == horizon_cap) return kInf;
    lo = probe;
    b_lo = b;
  }
  const double b_hi = budget(hi);
  while (hi - lo > 1) {
    const std::uint64_t mid = lo + (hi - lo) / 2;
    const double b = budget(mid);
    if (b < b_lo || b > b_hi) throw std::invalid_argument("budget is not monotone");
    if (b <= x) {
      lo = mid;
      b_lo = b;
    } else {
      hi = mid;
    }
  }
  return static_cast<double>(lo);
}

/// Regret floor under scarce querying: sum over suboptimal arms of
/// gap/(2K) * B_a^{-1}(1 / (8 K Kinf+)). Absent below the horizon threshold.
inline std::optional<double> scarce_regret_floor(const BanditInstance& instance, Family family,
                                                 const std::vector<QueryBudget>& budgets, std::uint64_t horizon,
                                                 std::uint64_t horizon_cap = 1ULL << 40) {
  check_family(instance, family);
  if (budgets.size() != instance.size()) throw std::invalid_argument("one budget per arm required");
  const double k = static_cast<double>(instance.size());
  double floor = 0.0;
  double threshold = 0.0;
  for (ArmIndex a = 0; a < instance.size(); ++a) {
    if (instance.is_optimal(a)) continue;
    const double kinf = kinf_plus(family, instance.arm(a).mean(), instance.mu_star());
    const double arg = std::isinf(kinf) ? 0.0 : (kinf == 0.0 ? kInf : 1.0 / (8.0 * k * kinf));
    const double inv = budget_inverse(budgets[a], arg, horizon_cap);
    threshold = std::max(threshold, inv);
    floor += instance.gap(a) / (2.0 * k) * inv;
  }
  if (std::isinf(threshold) || static_cast<double>(horizon) < threshold) return std::nullopt;
  return floor;
}

/// Per-arm querying profiles of the unit-variance Gaussian example.
inline QueryBudget polynomial_profile(double alpha, std::size_t arms) {
  const double k = static_cast<double>(arms);
  return [alpha, k](std::uint64_t t) { return std::pow(static_cast<double>(t), alpha) / k; };
}

inline QueryBudget polylog_profile(double alpha, std::size_t arms) {
  const double k = static_cast<double>(arms);
  return [alpha, k](std::uint64_t t) { return std::pow(std::log(static_cast<double>(t)), alpha) / k; };
}

inline QueryBudget gap_aware_log_profile(double gap) {
  return [gap](std::uint64_t t) { return std::log(static_cast<double>(t)) / (gap * gap); };
}

struct UpperBoundPrediction {
  bool unique_optimal = false;
  /// Main-text constants: +3K Delta_max and +3K.
  double regret = 0.0;
  double queries = 0.0;
  /// General constants: +(K + C(T)) Delta_max and +(K + C(T)).
  double regret_general = 0.0;
  double queries_general = 0.0;
  /// Almost-sure per-arm query cap N-bar^as(T) + 1.
  double per_arm_query_cap = 0.0;
};

/// Upper-bound predictions for BuFALU at horizon T.
template <ConfidenceRule Rule>
UpperBoundPrediction upper_bound_predictions(const BanditInstance& instance, const EpsilonSchedule& schedule,
                                          const Rule& rule, std::uint64_t horizon) {
  const std::size_t arms = instance.size();
  const double k = static_cast<double>(arms);
  UpperBoundPrediction p;
  p.unique_optimal = instance.unique_optimal();

  auto variance = [&](ArmIndex a) {
    const ArmModel& m = instance.arm(a);
    if constexpr (std::is_same_v<Rule, BernsteinRule>) {
      if (!m.bounded_unit()) throw std::invalid_argument("bernstein predictions need rewards in [0,1]");
    }
    return m.variance();
  };

  double regret_sum = 0.0;
  double query_sum = 0.0;
  for (ArmIndex a = 0; a < arms; ++a) {
    const double gap = instance.gap(a);
    if (gap > 0.0) {
      const double shrink = p.unique_optimal ? gap / 2.0 : gap;
      const double nb = n_bar(schedule, horizon, shrink, rule, variance(a));
      regret_sum += gap * (nb + static_cast<double>(l_epsilon(schedule, horizon, gap)));
      query_sum += nb;
    } else if (p.unique_optimal) {
      query_sum += n_bar(schedule, horizon, *instance.delta_min() / 2.0, rule, variance(a));
    } else {
      query_sum += n_bar(schedule, horizon, 0.0, rule, variance(a));
    }
  }
  const double general = k + Rule::failure_budget(static_cast<double>(horizon), arms);
  p.regret = regret_sum + 3.0 * k * instance.delta_max();
  p.queries = query_sum + 3.0 * k;
  p.regret_general = regret_sum + general * instance.delta_max();
  p.queries_general = query_sum + general;
  p.per_arm_query_cap = n_bar_as(schedule, horizon, rule) + 1.0;
  return p;
}

inline UpperBoundPrediction upper_bound_predictions(const BanditInstance& instance, const EpsilonSchedule& schedule,
                                                 const AnyRule& rule, std::uint64_t horizon) {
  return std::visit([&](const auto& r) { return upper_bound_predictions(instance, schedule, r, horizon); }, rule);
}

/// Problem-independent bound 4 sqrt(6 K T ln T) + sum_t eps(t) + 3 K Delta_max.
inline double problem_independent_bound(std::uint64_t horizon, std::size_t arms, const EpsilonSchedule& schedule,
                                        double delta_max) {
  if (horizon < 1) throw std::invalid_argument("horizon must be >= 1");
  const double t = static_cast<double>(horizon);
  const double k = static_cast<double>(arms);
  return 4.0 * std::sqrt(6.0 * k * t * std::log(t)) + epsilon_sum(schedule, horizon) + 3.0 * k * delta_max;
}

}  // namespace bufalu
