#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufalu/confidence.hpp"

namespace bufalu {

/// Nondecreasing positive querying budget t -> B(t) (total over all arms).
struct BudgetFn {
  enum class Kind { constant, linear, power };

  Kind kind = Kind::constant;
  double scale = 1.0;
  double exponent = 1.0;

  static BudgetFn constant(double b) { return checked({Kind::constant, b, 0.0}); }
  static BudgetFn linear(double fraction) { return checked({Kind::linear, fraction, 1.0}); }
  static BudgetFn power(double scale, double exponent) {
    if (exponent < 0.0) throw std::invalid_argument("budget exponent must be >= 0");
    return checked({Kind::power, scale, exponent});
  }

  double operator()(double t) const {
    switch (kind) {
      case Kind::constant:
        return scale;
      case Kind::linear:
        return scale * t;
      case Kind::power:
        return scale * std::pow(t, exponent);
    }
    return scale;
  }

  std::string describe() const;

 private:
  static BudgetFn checked(BudgetFn b) {
    if (!(b.scale > 0.0)) throw std::invalid_argument("budget scale must be positive");
    return b;
  }
};

namespace detail {

inline std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> parts;
  std::string::size_type start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    parts.push_back(s.substr(start, pos - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

inline double parse_number(const std::string& s) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + s + "'");
  }
  if (used != s.size()) throw std::invalid_argument("not a number: '" + s + "'");
  return v;
}

/// Shortest decimal form that reads back to the same double; plain notation
/// for moderate magnitudes.
inline std::string format_number(double v) {
  char buf[400];
  const double mag = std::abs(v);
  const bool plain = v == 0.0 || (mag >= 1e-4 && mag < 1e15);
  const auto res = plain ? std::to_chars(buf, buf + sizeof buf, v, std::chars_format::fixed)
                         : std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

inline std::string BudgetFn::describe() const {
  switch (kind) {
    case Kind::constant:
      return "const:" + detail::format_number(scale);
    case Kind::linear:
      return "linear:" + detail::format_number(scale);
    case Kind::power:
      return "power:" + detail::format_number(scale) + ":" + detail::format_number(exponent);
  }
  return {};
}

/// Budget specs: "const:B", "linear:f" (B(t) = f t), "power:c:alpha" (B(t) = c t^alpha).
inline BudgetFn parse_budget(const std::string& spec) {
  const auto parts = detail::split(spec, ':');
  if (parts[0] == "const" && parts.size() == 2) return BudgetFn::constant(detail::parse_number(parts[1]));
  if (parts[0] == "linear" && parts.size() == 2) return BudgetFn::linear(detail::parse_number(parts[1]));
  if (parts[0] == "power" && parts.size() == 3) {
    return BudgetFn::power(detail::parse_number(parts[1]), detail::parse_number(parts[2]));
  }
  throw std::invalid_argument("unknown budget spec: " + spec);
}

/// Round-indexed confidence-width threshold eps(t).
class EpsilonSchedule {
 public:
  enum class Kind { power, zero, inv_log, budget_hoeffding, budget_bernstein, fixed_budget };

  static EpsilonSchedule power(double alpha) {
    if (!(alpha >= 0.0)) throw std::invalid_argument("power schedule needs alpha >= 0");
    EpsilonSchedule s(Kind::power);
    s.alpha_ = alpha;
    return s;
  }
  static EpsilonSchedule zero() { return EpsilonSchedule(Kind::zero); }
  static EpsilonSchedule inv_log() { return EpsilonSchedule(Kind::inv_log); }

  /// eps(t) = sqrt(6 K ln t / B(t)) for a total budget B.
  static EpsilonSchedule from_budget_hoeffding(BudgetFn budget, std::size_t arms) {
    EpsilonSchedule s(Kind::budget_hoeffding);
    s.budget_ = budget;
    s.arms_ = checked_arms(arms);
    return s;
  }

  /// eps(t) = sqrt(6 ln t / (b-1)) + 14 ln t / (b-1) with per-arm budget b = B(t)/K.
  static EpsilonSchedule from_budget_bernstein(BudgetFn budget, std::size_t arms) {
    EpsilonSchedule s(Kind::budget_bernstein);
    s.budget_ = budget;
    s.arms_ = checked_arms(arms);
    return s;
  }

  /// Constant total budget B: eps(t) = sqrt(6 K ln t / B).
  static EpsilonSchedule fixed_budget(double total, std::size_t arms) {
    if (!(total > 0.0)) throw std::invalid_argument("fixed budget must be positive");
    EpsilonSchedule s(Kind::fixed_budget);
    s.budget_ = BudgetFn::constant(total);
    s.arms_ = checked_arms(arms);
    return s;
  }

  Kind kind() const { return kind_; }
  double alpha() const { return alpha_; }
  std::size_t arms() const { return arms_; }

  /// Total budget in force at round t, for budget-derived schedules.
  std::optional<double> budget(double t) const {
    if (kind_ == Kind::budget_hoeffding || kind_ == Kind::budget_bernstein || kind_ == Kind::fixed_budget) {
      return budget_(t);
    }
    return std::nullopt;
  }

  bool has_budget() const { return budget(1.0).has_value(); }

  double eval(double t) const {
    switch (kind_) {
      case Kind::power:
        if (alpha_ == 0.0) return 1.0;
        if (alpha_ == 0.25) return 1.0 / std::sqrt(std::sqrt(t));
        return std::pow(t, -alpha_);
      case Kind::zero:
        return 0.0;
      case Kind::inv_log:
        if (t <= 1.0) throw std::domain_error("inv_log schedule is undefined for t <= 1");
        return 1.0 / std::log(t);
      case Kind::budget_hoeffding:
      case Kind::fixed_budget: {
        const double b = budget_(t);
        if (!(b > 0.0)) throw std::domain_error("budget must be positive");
        return std::sqrt(6.0 * static_cast<double>(arms_) * std::log(t) / b);
      }
      case Kind::budget_bernstein: {
        const double per_arm = budget_(t) / static_cast<double>(arms_);
        if (!(per_arm > 1.0)) throw std::domain_error("per-arm budget must exceed 1 for the bernstein schedule");
        const double m = per_arm - 1.0;
        const double l = std::log(t);
        return std::sqrt(6.0 * l / m) + 14.0 * l / m;
      }
    }
    return 0.0;
  }

  double operator()(double t) const { return eval(t); }

  /// Whether eps is defined at t = 1 (all but inv_log).
  bool defined_at_one() const { return kind_ != Kind::inv_log; }

  /// Schedules that are nonincreasing in t by construction.
  bool nonincreasing() const {
    return kind_ == Kind::power || kind_ == Kind::zero || kind_ == Kind::inv_log;
  }

  /// Schedules for which max_t N(t, max(mu, eps(t))) is attained at t = T.
  bool n_bar_attained_at_horizon() const {
    return nonincreasing() || kind_ == Kind::budget_hoeffding || kind_ == Kind::fixed_budget;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::power:
        return "power:" + detail::format_number(alpha_);
      case Kind::zero:
        return "zero";
      case Kind::inv_log:
        return "invlog";
      case Kind::budget_hoeffding:
        return "budget-hoeffding:" + budget_.describe();
      case Kind::budget_bernstein:
        return "budget-bernstein:" + budget_.describe();
      case Kind::fixed_budget:
        return "fixed:" + detail::format_number(budget_.scale);
    }
    return {};
  }

 private:
  explicit EpsilonSchedule(Kind k) : kind_(k) {}

  static std::size_t checked_arms(std::size_t k) {
    if (k < 2) throw std::invalid_argument("budget schedules need K >= 2");
    return k;
  }

  Kind kind_;
  double alpha_ = 0.0;
  BudgetFn budget_ = BudgetFn::constant(1.0);
  std::size_t arms_ = 0;
};

/// Names: "power:<alpha>", "zero", "invlog", "budget-hoeffding:<budget>",
/// "budget-bernstein:<budget>", "fixed:<B>". `default_budget` is used when a
/// budget-derived name carries no budget spec.
inline EpsilonSchedule parse_schedule(const std::string& spec, std::size_t arms,
                                      const std::optional<std::string>& default_budget = std::nullopt) {
  const auto colon = spec.find(':');
  const std::string head = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? std::string{} : spec.substr(colon + 1);
  if (head == "power" && !rest.empty()) return EpsilonSchedule::power(detail::parse_number(rest));
  if (head == "zero" && rest.empty()) return EpsilonSchedule::zero();
  if (head == "invlog" && rest.empty()) return EpsilonSchedule::inv_log();
  if (head == "fixed" && !rest.empty()) return EpsilonSchedule::fixed_budget(detail::parse_number(rest), arms);
  if (head == "budget-hoeffding" || head == "budget-bernstein") {
    std::string budget = rest;
    if (budget.empty()) {
      if (!default_budget) throw std::invalid_argument(head + " needs a budget spec");
      budget = *default_budget;
    }
    const auto fn = parse_budget(budget);
    return head == "budget-hoeffding" ? EpsilonSchedule::from_budget_hoeffding(fn, arms)
                                      : EpsilonSchedule::from_budget_bernstein(fn, arms);
  }
  throw std::invalid_argument("unknown schedule: " + spec);
}

/// L_eps(T, delta): number of rounds t <= T with eps(t) >= delta. For inv_log
/// the round t = 1 is counted, as eps -> +inf there.
inline std::uint64_t l_epsilon(const EpsilonSchedule& eps, std::uint64_t horizon, double delta) {
  std::uint64_t count = 0;
  for (std::uint64_t t = 1; t <= horizon; ++t) {
    if (t == 1 && !eps.defined_at_one()) {
      ++count;
      continue;
    }
    if (eps.eval(static_cast<double>(t)) >= delta) ++count;
  }
  return count;
}

/// sup{t >= 1 : eps(t) >= delta} for nonincreasing schedules, +inf when
/// unbounded, 0 when empty. Absent for schedules without a known monotone form.
inline std::optional<double> epsilon_inverse(const EpsilonSchedule& eps, double delta) {
  if (!eps.nonincreasing()) return std::nullopt;
  if (delta <= 0.0) return kInf;
  auto above = [&](double t) { return t >= 1.0 && (t == 1.0 && !eps.defined_at_one() ? true : eps.eval(t) >= delta); };
  double guess = 0.0;
  switch (eps.kind()) {
    case EpsilonSchedule::Kind::zero:
      return 0.0;
    case EpsilonSchedule::Kind::power:
      if (eps.alpha() == 0.0) return delta <= 1.0 ? kInf : 0.0;
      guess = std::floor(std::pow(delta, -1.0 / eps.alpha()));
      break;
    case EpsilonSchedule::Kind::inv_log:
      guess = std::floor(std::exp(1.0 / delta));
      break;
    default:
      return std::nullopt;
  }
  if (!std::isfinite(guess)) return kInf;
  guess = std::max(guess, 0.0);
  while (above(guess + 1.0)) guess += 1.0;
  while (guess >= 1.0 && !above(guess)) guess -= 1.0;
  return guess;
}

/// max_{t in [T]} N^g(t, max(delta, eps(t))) by exact scan; t = 1 contributes 0.
template <ConfidenceRule Rule>
double n_bar_scan(const EpsilonSchedule& eps, std::uint64_t horizon, double delta, const Rule& rule,
                  double variance = 0.25) {
  double best = 0.0;
  for (std::uint64_t t = 2; t <= horizon; ++t) {
    const double td = static_cast<double>(t);
    best = std::max(best, static_cast<double>(rule.n_good(td, std::max(delta, eps.eval(td)), variance)));
  }
  return best;
}

/// N^g(T, max(delta, eps(T))), valid when the maximum is attained at T.
template <ConfidenceRule Rule>
std::optional<double> n_bar_closed_form(const EpsilonSchedule& eps, std::uint64_t horizon, double delta,
                                        const Rule& rule, double variance = 0.25) {
  if (!eps.n_bar_attained_at_horizon()) return std::nullopt;
  if (horizon < 2) return 0.0;
  const double td = static_cast<double>(horizon);
  return rule.n_good(td, std::max(delta, eps.eval(td)), variance);
}

/// N-bar(T, delta): exact scan, cross-checked against the closed form where it applies.
template <ConfidenceRule Rule>
double n_bar(const EpsilonSchedule& eps, std::uint64_t horizon, double delta, const Rule& rule,
             double variance = 0.25) {
  const double scan = n_bar_scan(eps, horizon, delta, rule, variance);
  if (const auto closed = n_bar_closed_form(eps, horizon, delta, rule, variance)) {
    if (std::abs(*closed - scan) > 1e-9 * std::max(1.0, scan)) {
      throw std::logic_error("n_bar closed form disagrees with the scan");
    }
  }
  return scan;
}

inline double n_bar(const EpsilonSchedule& eps, std::uint64_t horizon, double delta, const AnyRule& rule,
                    double variance = 0.25) {
  return std::visit([&](const auto& r) { return n_bar(eps, horizon, delta, r, variance); }, rule);
}

/// max_{t in [T]} N^as(t, eps(t)).
template <ConfidenceRule Rule>
double n_bar_as(const EpsilonSchedule& eps, std::uint64_t horizon, const Rule& rule) {
  double best = 0.0;
  for (std::uint64_t t = 2; t <= horizon; ++t) {
    const double td = static_cast<double>(t);
    best = std::max(best, static_cast<double>(rule.n_as_value(td, eps.eval(td))));
  }
  return best;
}

inline double n_bar_as(const EpsilonSchedule& eps, std::uint64_t horizon, const AnyRule& rule) {
  return std::visit([&](const auto& r) { return n_bar_as(eps, horizon, r); }, rule);
}

/// Sum of eps(t) over t = 1..T, skipping rounds where eps is undefined.
inline double epsilon_sum(const EpsilonSchedule& eps, std::uint64_t horizon) {
  double total = 0.0;
  for (std::uint64_t t = eps.defined_at_one() ? 1 : 2; t <= horizon; ++t) total += eps.eval(static_cast<double>(t));
  return total;
}

}  // namespace bufalu
