#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "ssap/distributions.hpp"
#include "ssap/policies.hpp"

namespace ssap {

// Independent 64-bit stream seed for (master, trial, stream) via splitmix64.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream = 0);

enum class WorldMode { Iid, Spatial };

struct WorldConfig {
  WorldMode mode = WorldMode::Iid;
  std::size_t n_stages = 60;
  PriorPtr generator;           // Iid: distribution the observations are drawn from
  double intensity = 0.0;       // Spatial: features per square meter
  double sensing_radius = 1.0;  // Spatial: meters
  double spacing = 2.0;         // Spatial: meters between waypoints, >= 2 * sensing_radius
};

// N independent draws, deterministic in seed.
std::vector<double> generate_iid_sequence(const Prior& prior, std::size_t n_stages, std::uint64_t seed);

// Homogeneous Poisson point process over the rectangle enclosing a straight
// path of N waypoints (plus a sensing-radius margin); returns the number of
// features within sensing_radius of each waypoint. Throws InvalidParameter
// when spacing < 2 * sensing_radius or the mode is not Spatial.
std::vector<std::int64_t> generate_spatial_sequence(const WorldConfig& config, std::uint64_t seed);

// Expected per-waypoint count, intensity * pi * radius^2.
double spatial_rate(const WorldConfig& config);

struct ExperimentConfig {
  WorldConfig world;
  PriorPtr prior;  // handed to threshold-based policies lacking their own
  std::size_t n_robots = 3;
  std::size_t n_trials = 150;
  std::uint64_t master_seed = 1;
  std::vector<PolicySpec> policies;
  unsigned threads = 1;  // 0 = hardware concurrency
};

struct PolicyStats {
  std::string name;
  double mean_reward = 0.0;
  double reward_sem = 0.0;
  double mean_utility = 0.0;  // mean over trials of reward / oracle reward
  double utility_sem = 0.0;
  std::vector<double> rewards;    // per trial
  std::vector<double> utilities;  // per trial
};

struct ExperimentReport {
  std::size_t n_stages = 0;
  std::size_t n_robots = 0;
  std::size_t n_trials = 0;
  std::uint64_t master_seed = 0;
  std::vector<PolicyStats> policies;

  // Throws std::out_of_range for an absent policy.
  const PolicyStats& at(std::string_view name) const;
};

// Sample standard deviation / sqrt(n); zero for n < 2.
double standard_error(std::span<const double> values);
// Standard error of the per-trial differences a[t] - b[t].
double paired_difference_sem(std::span<const double> a, std::span<const double> b);

// Every policy sees the same sequence within a trial. Trial t draws its
// sequence from derive_seed(master, t, 0) and the random policy from
// derive_seed(master, t, 1), so results are independent of threading.
// Throws TrialFailure naming the lowest failing trial.
ExperimentReport run_experiment(const ExperimentConfig& config);

nlohmann::json report_to_json(const ExperimentReport& report);
// `policy,mean_reward,utility_pct,sem` where sem is the utility SEM in percent.
void write_report_csv(const ExperimentReport& report, std::ostream& out);

}  // namespace ssap
