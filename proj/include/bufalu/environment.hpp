#pragma once

#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "bufalu/core.hpp"
#include "bufalu/schedules.hpp"

namespace bufalu {

namespace detail {

/// splitmix64 finaliser; used only to derive independent stream seeds.
constexpr std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace detail

/// Per-episode randomness. Every arm owns its own stream, so the k-th play of
/// an arm sees the same reward under any policy run with the same
/// (experiment id, seed).
class EpisodeRng {
 public:
  EpisodeRng(std::uint64_t experiment_id, std::uint64_t seed, std::size_t arms)
      : experiment_id_(experiment_id), seed_(seed) {
    const std::uint64_t base = detail::mix64(detail::mix64(experiment_id) ^ seed);
    arm_streams_.reserve(arms);
    for (std::size_t a = 0; a < arms; ++a) arm_streams_.emplace_back(detail::mix64(base + a + 1));
    aux_.seed(detail::mix64(base ^ 0x7461696c62726b00ULL));
    normals_.resize(arms);
  }

  std::uint64_t seed() const { return seed_; }
  std::uint64_t experiment_id() const { return experiment_id_; }

  std::mt19937_64& arm_stream(ArmIndex a) { return arm_streams_.at(a); }
  std::normal_distribution<double>& normal(ArmIndex a) { return normals_.at(a); }

  /// Stream for tie-breaking and other policy-side randomness.
  std::mt19937_64& aux() { return aux_; }

 private:
  std::uint64_t experiment_id_;
  std::uint64_t seed_;
  std::vector<std::mt19937_64> arm_streams_;
  std::vector<std::normal_distribution<double>> normals_;
  std::mt19937_64 aux_;
};

/// Draws the reward of arm `a`. Deterministic arms consume no randomness.
inline double sample_reward(const BanditInstance& instance, ArmIndex a, EpisodeRng& rng) {
  const ArmModel& arm = instance.arm(a);
  switch (arm.kind) {
    case ArmModel::Kind::bernoulli: {
      std::bernoulli_distribution coin(arm.param);
      return coin(rng.arm_stream(a)) ? 1.0 : 0.0;
    }
    case ArmModel::Kind::gaussian_unit:
      return arm.param + rng.normal(a)(rng.arm_stream(a));
    case ArmModel::Kind::deterministic:
      return arm.param;
  }
  return 0.0;
}

/// Arm specs: "bern:<p>", "gauss:<mean>", "det:<value>".
inline ArmModel parse_arm(const std::string& spec) {
  const auto colon = spec.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("bad arm spec: " + spec);
  const std::string head = spec.substr(0, colon);
  const double v = detail::parse_number(spec.substr(colon + 1));
  if (head == "bern") return ArmModel::bernoulli(v);
  if (head == "gauss") return ArmModel::gaussian_unit(v);
  if (head == "det") return ArmModel::deterministic(v);
  throw std::invalid_argument("unknown arm family: " + spec);
}

inline std::string describe_arm(const ArmModel& arm) {
  switch (arm.kind) {
    case ArmModel::Kind::bernoulli:
      return "bern:" + detail::format_number(arm.param);
    case ArmModel::Kind::gaussian_unit:
      return "gauss:" + detail::format_number(arm.param);
    case ArmModel::Kind::deterministic:
      return "det:" + detail::format_number(arm.param);
  }
  return {};
}

inline BanditInstance parse_instance(const std::vector<std::string>& arms) {
  std::vector<ArmModel> models;
  models.reserve(arms.size());
  for (const auto& s : arms) models.push_back(parse_arm(s));
  return BanditInstance(std::move(models));
}

}  // namespace bufalu
