#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>

#include "bufalu/experiment.hpp"

#ifndef BUFALU_PRESET_DIR
#define BUFALU_PRESET_DIR "presets"
#endif

namespace fs = std::filesystem;
using namespace bufalu;

namespace {

constexpr int kConfigError = 2;
constexpr int kInvariantViolation = 3;

struct Common {
  std::string config;
  std::string preset;
  std::string out;
  unsigned jobs = std::max(1u, std::thread::hardware_concurrency());
  std::optional<std::size_t> seeds;
  std::optional<std::uint64_t> base_seed;
};

fs::path preset_dir() {
  if (const char* dir = std::getenv("BUFALU_PRESETS")) return dir;
  return BUFALU_PRESET_DIR;
}

std::vector<ExperimentConfig> resolve(const Common& c) {
  if (c.config.empty() == c.preset.empty()) throw ConfigError("give exactly one of --config or --preset");
  const fs::path path = c.config.empty() ? preset_dir() / (c.preset + ".json") : fs::path(c.config);
  if (!c.preset.empty() && !fs::exists(path)) throw ConfigError("unknown preset: " + c.preset);
  auto configs = load_configs(path);
  for (auto& cfg : configs) {
    if (c.seeds) cfg.seeds = *c.seeds;
    if (c.base_seed) cfg.base_seed = *c.base_seed;
    cfg.validate();
  }
  return configs;
}

fs::path out_root(const Common& c, const ExperimentConfig& cfg) {
  if (const char* env = std::getenv("BUFALU_OUT"); env && *env) return env;
  if (!c.out.empty()) return c.out;
  return cfg.out_dir;
}

int cmd_run(const Common& c) {
  const auto configs = resolve(c);
  std::uint64_t violations = 0;
  for (const auto& cfg : configs) {
    const auto result = run_experiment(cfg, c.jobs);
    const auto files = write_outputs(result, out_root(c, cfg));
    for (const auto& run : result.runs) {
      std::printf("%s [%s]\n", cfg.name.c_str(), run.schedule.c_str());
      for (const auto& p : run.policies) {
        std::printf("  %-7s regret %12.2f  queries %12.2f  violations %llu\n", policy_name(p.policy),
                    p.batch.regret.mean, p.batch.queries.mean,
                    static_cast<unsigned long long>(p.batch.hard_violations));
      }
    }
    for (const auto& f : files) std::printf("  wrote %s\n", f.string().c_str());
    violations += result.hard_violations();
  }
  if (violations > 0) {
    std::fprintf(stderr, "invariant violations: %llu\n", static_cast<unsigned long long>(violations));
    return kInvariantViolation;
  }
  return 0;
}

int cmd_bounds(const Common& c) {
  const auto configs = resolve(c);
  nlohmann::json all = nlohmann::json::array();
  for (const auto& cfg : configs) {
    BoundReport report;
    try {
      report = make_bound_report(cfg);
    } catch (const std::invalid_argument& e) {
      throw ConfigError(cfg.name + ": " + e.what());
    }
    const fs::path dir = out_root(c, cfg) / cfg.name;
    fs::create_directories(dir);
    const auto j = to_json(report);
    write_text(dir / "bounds.json", j.dump(2) + "\n");
    std::ostringstream csv;
    write_bound_csv(csv, report);
    write_text(dir / "bounds.csv", csv.str());
    all.push_back(j);
  }
  std::cout << (all.size() == 1 ? all[0] : all).dump(2) << "\n";
  return 0;
}

int cmd_list_presets() {
  std::vector<std::string> names;
  if (fs::is_directory(preset_dir())) {
    for (const auto& e : fs::directory_iterator(preset_dir())) {
      if (e.path().extension() == ".json") names.push_back(e.path().stem().string());
    }
  }
  std::sort(names.begin(), names.end());
  for (const auto& n : names) std::cout << n << "\n";
  return 0;
}

void add_common(CLI::App* app, Common& c) {
  app->add_option("--config", c.config, "JSON experiment config");
  app->add_option("--preset", c.preset, "named preset (see list-presets)");
  app->add_option("--out", c.out, "output directory (BUFALU_OUT overrides)");
  app->add_option("--jobs", c.jobs, "parallel episodes")->check(CLI::PositiveNumber);
  app->add_option("--seeds", c.seeds, "override the seed count")->check(CLI::PositiveNumber);
  app->add_option("--base-seed", c.base_seed, "override the first seed");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Bandits with queried rewards: simulation runner and bound calculator"};
  app.require_subcommand(1);
  Common run_opts;
  Common bound_opts;
  auto* run = app.add_subcommand("run", "run an experiment and write trajectory/summary CSVs");
  add_common(run, run_opts);
  auto* bounds = app.add_subcommand("bounds", "evaluate lower and upper bounds for an instance");
  add_common(bounds, bound_opts);
  auto* list = app.add_subcommand("list-presets", "list shipped presets");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : kConfigError;
  }

  try {
    if (*run) return cmd_run(run_opts);
    if (*bounds) return cmd_bounds(bound_opts);
    if (*list) return cmd_list_presets();
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kConfigError;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
