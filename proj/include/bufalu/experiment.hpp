#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "bufalu/bounds.hpp"
#include "bufalu/simulator.hpp"

namespace bufalu {

/// Bad or inconsistent experiment configuration.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
  std::string name = "experiment";
  std::vector<std::string> arms;
  std::vector<std::string> policies{"bufalu", "bufau", "cbm", "greedy"};
  /// One entry per run; several entries make a sweep.
  std::vector<std::string> schedules{"power:0.25"};
  std::optional<std::string> budget;
  std::string rule = "hoeffding";
  std::uint64_t horizon = 100000;
  std::size_t seeds = 1;
  std::uint64_t base_seed = 0;
  std::uint64_t experiment_id = 0;
  std::size_t checkpoints = 200;
  std::optional<double> query_cost;
  std::string out_dir = "out";
  bool random_tie_break = false;
  std::optional<std::string> family;

  BanditInstance instance() const { return parse_instance(arms); }
  AnyRule confidence_rule() const { return parse_rule(rule); }
  EpsilonSchedule schedule(std::size_t i) const { return parse_schedule(schedules.at(i), arms.size(), budget); }

  /// Family used for lower bounds: explicit, else bernoulli when every arm is.
  Family bound_family() const {
    if (family) return parse_family(*family);
    const auto inst = instance();
    for (const auto& a : inst.arms()) {
      if (a.kind != ArmModel::Kind::bernoulli) return Family::gaussian_unit_variance;
    }
    return Family::bernoulli;
  }

  /// Parses every name so mistakes surface before any simulation starts.
  void validate() const {
    try {
      const auto inst = instance();
      if (horizon < inst.size()) throw ConfigError("horizon must be at least the number of arms");
      if (seeds < 1) throw ConfigError("seeds must be >= 1");
      if (checkpoints < 1) throw ConfigError("checkpoints must be >= 1");
      if (policies.empty()) throw ConfigError("no policies given");
      if (schedules.empty()) throw ConfigError("no schedule given");
      for (const auto& p : policies) parse_policy(p);
      for (std::size_t i = 0; i < schedules.size(); ++i) schedule(i);
      confidence_rule();
      if (query_cost && *query_cost < 0.0) throw ConfigError("query_cost must be nonnegative");
      check_family(inst, bound_family());
    } catch (const ConfigError&) {
      throw;
    } catch (const std::exception& e) {
      throw ConfigError(name + ": " + e.what());
    }
  }
};

namespace detail {

template <typename T>
void read_field(const nlohmann::json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

template <typename T>
void read_field(const nlohmann::json& j, const char* key, std::optional<T>& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  static const char* known[] = {"name",   "instance",   "policies",      "schedule", "budget",
                                "rule",   "horizon",    "seeds",         "base_seed", "experiment_id",
                                "checkpoints", "query_cost", "out_dir", "random_tie_break", "family"};
  for (const auto& item : j.items()) {
    bool ok = false;
    for (const char* k : known) ok = ok || item.key() == k;
    if (!ok) throw ConfigError("unknown config field: " + item.key());
  }
  ExperimentConfig c;
  try {
    read_field(j, "name", c.name);
    if (!j.contains("instance")) throw ConfigError("config needs an instance");
    c.arms = j.at("instance").at("arms").get<std::vector<std::string>>();
    read_field(j, "policies", c.policies);
    if (j.contains("schedule")) {
      const auto& s = j.at("schedule");
      c.schedules = s.is_array() ? s.get<std::vector<std::string>>() : std::vector<std::string>{s.get<std::string>()};
    }
    read_field(j, "budget", c.budget);
    read_field(j, "rule", c.rule);
    read_field(j, "horizon", c.horizon);
    read_field(j, "seeds", c.seeds);
    read_field(j, "base_seed", c.base_seed);
    read_field(j, "experiment_id", c.experiment_id);
    read_field(j, "checkpoints", c.checkpoints);
    read_field(j, "query_cost", c.query_cost);
    read_field(j, "out_dir", c.out_dir);
    read_field(j, "random_tie_break", c.random_tie_break);
    read_field(j, "family", c.family);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("malformed config: ") + e.what());
  }
  return c;
}

}  // namespace detail

/// A config is one experiment, or a suite with an "experiments" array whose
/// entries override the shared top-level fields.
inline std::vector<ExperimentConfig> configs_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  std::vector<ExperimentConfig> out;
  if (!j.contains("experiments")) {
    out.push_back(detail::config_from_json(j));
  } else {
    nlohmann::json shared = j;
    shared.erase("experiments");
    if (!j.at("experiments").is_array()) throw ConfigError("experiments must be an array");
    for (const auto& e : j.at("experiments")) {
      nlohmann::json merged = shared;
      merged.update(e);
      out.push_back(detail::config_from_json(merged));
    }
  }
  for (const auto& c : out) c.validate();
  return out;
}

inline std::vector<ExperimentConfig> load_configs(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config: " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return configs_from_json(j);
}

struct PolicyRun {
  PolicyKind policy = PolicyKind::bufalu;
  BatchResult batch;
};

struct ScheduleRun {
  std::string schedule;
  /// B(T)/T for budget-derived schedules.
  std::optional<double> budget_fraction;
  std::vector<PolicyRun> policies;

  const PolicyRun& get(PolicyKind p) const {
    for (const auto& r : policies) {
      if (r.policy == p) return r;
    }
    throw std::out_of_range(std::string("policy not run: ") + policy_name(p));
  }
};

struct ExperimentResult {
  ExperimentConfig config;
  std::vector<ScheduleRun> runs;

  std::uint64_t hard_violations() const {
    std::uint64_t n = 0;
    for (const auto& r : runs) {
      for (const auto& p : r.policies) n += p.batch.hard_violations;
    }
    return n;
  }
};

inline ExperimentResult run_experiment(const ExperimentConfig& config, unsigned jobs = 1) {
  config.validate();
  const auto instance = config.instance();
  const auto rule = config.confidence_rule();
  ExperimentResult result{config, {}};
  for (std::size_t i = 0; i < config.schedules.size(); ++i) {
    const auto schedule = config.schedule(i);
    ScheduleRun run;
    run.schedule = config.schedules[i];
    const double td = static_cast<double>(config.horizon);
    if (const auto b = schedule.budget(td)) run.budget_fraction = *b / td;
    for (const auto& name : config.policies) {
      BatchSpec spec;
      spec.policy = parse_policy(name);
      spec.horizon = config.horizon;
      spec.seeds = seed_range(config.base_seed, config.seeds);
      spec.experiment_id = config.experiment_id;
      spec.checkpoints = log_checkpoints(config.horizon, config.checkpoints);
      spec.random_tie_break = config.random_tie_break;
      spec.jobs = jobs;
      run.policies.push_back({spec.policy, run_batch(instance, schedule, rule, spec)});
    }
    result.runs.push_back(std::move(run));
  }
  return result;
}

// ---- CSV ----

inline void write_trajectory_csv(std::ostream& os, const ScheduleRun& run) {
  os << "policy,seed,t,regret,queries\n";
  for (const auto& p : run.policies) {
    for (const auto& e : p.batch.episodes) {
      for (const auto& c : e.checkpoints) {
        os << policy_name(p.policy) << ',' << e.seed << ',' << c.t << ',' << detail::format_number(c.regret) << ','
           << c.queries << '\n';
      }
    }
  }
}

struct SummaryRow {
  std::string policy;
  std::string metric;
  SummaryStats stats;
};

/// Rows of the summary table: final regret, final queries, and the
/// cost-aware regret when a query cost is set.
inline std::vector<SummaryRow> summary_rows(const ScheduleRun& run, std::optional<double> query_cost) {
  std::vector<SummaryRow> rows;
  for (const auto& p : run.policies) {
    rows.push_back({policy_name(p.policy), "regret", p.batch.regret});
    rows.push_back({policy_name(p.policy), "queries", p.batch.queries});
    if (query_cost) {
      std::vector<double> v;
      for (const auto& e : p.batch.episodes) v.push_back(cost_aware_regret(e, *query_cost));
      rows.push_back({policy_name(p.policy), "cost_regret", summarize(v)});
    }
  }
  return rows;
}

inline void write_summary_row(std::ostream& os, const SummaryStats& s) {
  os << detail::format_number(s.mean) << ',' << detail::format_number(s.std) << ',' << detail::format_number(s.q90)
     << ',' << detail::format_number(s.max) << '\n';
}

inline void write_summary_csv(std::ostream& os, const ScheduleRun& run, std::optional<double> query_cost) {
  os << "policy,metric,mean,std,q90,max\n";
  for (const auto& r : summary_rows(run, query_cost)) {
    os << r.policy << ',' << r.metric << ',';
    write_summary_row(os, r.stats);
  }
}

inline void write_sweep_csv(std::ostream& os, const ExperimentResult& result) {
  os << "schedule,budget_fraction,policy,metric,mean,std,q90,max\n";
  for (const auto& run : result.runs) {
    for (const auto& r : summary_rows(run, result.config.query_cost)) {
      os << run.schedule << ',' << (run.budget_fraction ? detail::format_number(*run.budget_fraction) : "") << ','
         << r.policy << ',' << r.metric << ',';
      write_summary_row(os, r.stats);
    }
  }
}

/// Directory-safe form of a schedule name.
inline std::string schedule_label(const std::string& schedule) {
  std::string s = schedule;
  for (char& ch : s) {
    if (ch == ':' || ch == '/' || ch == ' ') ch = '_';
  }
  return s;
}

inline void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << text;
}

/// Writes <out>/<name>/trajectory.csv and summary.csv; a sweep gets one
/// subdirectory per schedule plus sweep.csv. Returns the files written.
inline std::vector<std::filesystem::path> write_outputs(const ExperimentResult& result,
                                                        const std::filesystem::path& out_root) {
  namespace fs = std::filesystem;
  std::vector<fs::path> written;
  const fs::path dir = out_root / result.config.name;
  fs::create_directories(dir);
  const bool sweep = result.runs.size() > 1;
  for (const auto& run : result.runs) {
    const fs::path d = sweep ? dir / schedule_label(run.schedule) : dir;
    fs::create_directories(d);
    std::ostringstream traj;
    std::ostringstream summ;
    write_trajectory_csv(traj, run);
    write_summary_csv(summ, run, result.config.query_cost);
    write_text(d / "trajectory.csv", traj.str());
    write_text(d / "summary.csv", summ.str());
    written.push_back(d / "trajectory.csv");
    written.push_back(d / "summary.csv");
  }
  if (sweep) {
    std::ostringstream s;
    write_sweep_csv(s, result);
    write_text(dir / "sweep.csv", s.str());
    written.push_back(dir / "sweep.csv");
  }
  return written;
}

// ---- bound report ----

struct ArmBound {
  std::string spec;
  double mean = 0.0;
  double gap = 0.0;
  bool optimal = false;
  /// Coefficient of ln T in the asymptotic query floor.
  std::optional<double> query_coefficient;
  std::optional<double> paired_floor;
  std::optional<double> paired_separator;
};

struct BoundReport {
  std::string name;
  Family family = Family::bernoulli;
  std::string schedule;
  std::string rule;
  std::uint64_t horizon = 0;
  std::vector<ArmBound> arms;
  bool super_logarithmic = false;
  std::optional<double> scarce_regret_floor;
  UpperBoundPrediction predictions;
  double problem_independent = 0.0;
};

inline BoundReport make_bound_report(const ExperimentConfig& config, std::size_t schedule_index = 0) {
  config.validate();
  const auto instance = config.instance();
  const auto family = config.bound_family();
  const auto schedule = config.schedule(schedule_index);
  const auto rule = config.confidence_rule();

  BoundReport r;
  r.name = config.name;
  r.family = family;
  r.schedule = config.schedules[schedule_index];
  r.rule = rule_name(rule);
  r.horizon = config.horizon;

  const auto floor = asymptotic_query_floor(instance, family);
  r.super_logarithmic = floor.super_logarithmic;
  for (ArmIndex a = 0; a < instance.size(); ++a) {
    ArmBound b;
    b.spec = describe_arm(instance.arm(a));
    b.mean = instance.arm(a).mean();
    b.gap = instance.gap(a);
    b.optimal = instance.is_optimal(a);
    b.query_coefficient = floor.coefficients[a];
    if (instance.unique_optimal() && !b.optimal) {
      const auto p = paired_separation_floor(instance, family, a);
      b.paired_floor = p.value;
      b.paired_separator = p.separator;
    }
    r.arms.push_back(b);
  }

  if (schedule.has_budget()) {
    const double k = static_cast<double>(instance.size());
    const QueryBudget per_arm = [schedule, k](std::uint64_t t) { return *schedule.budget(static_cast<double>(t)) / k; };
    r.scarce_regret_floor = scarce_regret_floor(instance, family, std::vector<QueryBudget>(instance.size(), per_arm),
                                                config.horizon);
  }
  r.predictions = upper_bound_predictions(instance, schedule, rule, config.horizon);
  r.problem_independent = problem_independent_bound(config.horizon, instance.size(), schedule, instance.delta_max());
  return r;
}

namespace detail {

/// Numbers as JSON numbers, infinities as the string "inf", absent values as null.
inline nlohmann::json json_number(std::optional<double> v) {
  if (!v) return nullptr;
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return *v;
}

inline std::string csv_number(std::optional<double> v) {
  if (!v) return "";
  if (std::isinf(*v)) return *v > 0 ? "inf" : "-inf";
  return format_number(*v);
}

}  // namespace detail

inline nlohmann::json to_json(const BoundReport& r) {
  using detail::json_number;
  nlohmann::json j;
  j["name"] = r.name;
  j["family"] = family_name(r.family);
  j["schedule"] = r.schedule;
  j["rule"] = r.rule;
  j["horizon"] = r.horizon;
  j["super_logarithmic"] = r.super_logarithmic;
  j["arms"] = nlohmann::json::array();
  const double log_t = std::log(static_cast<double>(r.horizon));
  for (const auto& a : r.arms) {
    nlohmann::json e;
    e["spec"] = a.spec;
    e["mean"] = a.mean;
    e["gap"] = a.gap;
    e["optimal"] = a.optimal;
    e["query_coefficient"] = json_number(a.query_coefficient);
    e["query_floor_at_horizon"] =
        json_number(a.query_coefficient ? std::optional<double>(*a.query_coefficient * log_t) : std::nullopt);
    e["paired_floor"] = json_number(a.paired_floor);
    e["paired_separator"] = json_number(a.paired_separator);
    j["arms"].push_back(e);
  }
  j["scarce_regret_floor"] = json_number(r.scarce_regret_floor);
  const auto& p = r.predictions;
  j["predictions"] = {{"unique_optimal", p.unique_optimal},
                      {"regret", json_number(p.regret)},
                      {"queries", json_number(p.queries)},
                      {"regret_general", json_number(p.regret_general)},
                      {"queries_general", json_number(p.queries_general)},
                      {"per_arm_query_cap", json_number(p.per_arm_query_cap)}};
  j["problem_independent_regret"] = json_number(r.problem_independent);
  return j;
}

/// Long format: quantity,arm,value (arm empty for instance-level rows).
inline void write_bound_csv(std::ostream& os, const BoundReport& r) {
  using detail::csv_number;
  os << "quantity,arm,value\n";
  for (std::size_t a = 0; a < r.arms.size(); ++a) {
    const auto& b = r.arms[a];
    if (b.query_coefficient) os << "query_coefficient," << a << ',' << csv_number(b.query_coefficient) << '\n';
    if (b.paired_floor) os << "paired_floor," << a << ',' << csv_number(b.paired_floor) << '\n';
    if (b.paired_separator) os << "paired_separator," << a << ',' << csv_number(b.paired_separator) << '\n';
  }
  os << "super_logarithmic,," << (r.super_logarithmic ? 1 : 0) << '\n';
  if (r.scarce_regret_floor) os << "scarce_regret_floor,," << csv_number(r.scarce_regret_floor) << '\n';
  const auto& p = r.predictions;
  os << "regret_prediction,," << csv_number(p.regret) << '\n';
  os << "query_prediction,," << csv_number(p.queries) << '\n';
  os << "regret_prediction_general,," << csv_number(p.regret_general) << '\n';
  os << "query_prediction_general,," << csv_number(p.queries_general) << '\n';
  os << "per_arm_query_cap,," << csv_number(p.per_arm_query_cap) << '\n';
  os << "problem_independent_regret,," << csv_number(r.problem_independent) << '\n';
}

}  // namespace bufalu
