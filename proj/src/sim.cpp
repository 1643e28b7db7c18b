#include "ssap/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <ostream>
#include <random>
#include <stdexcept>
#include <thread>

#include "ssap/csv.hpp"
#include "ssap/errors.hpp"

namespace ssap {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

double utility_of(double reward, double oracle_reward) {
  if (oracle_reward == 0.0) return reward == 0.0 ? 1.0 : 0.0;
  return reward / oracle_reward;
}

double mean_of(std::span<const double> v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (const double x : v) s += x;
  return s / static_cast<double>(v.size());
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t trial, std::uint64_t stream) {
  return splitmix64(splitmix64(splitmix64(master) ^ trial) ^ (stream * 0xd1b54a32d192ed03ULL));
}

std::vector<double> generate_iid_sequence(const Prior& prior, std::size_t n_stages, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> out(n_stages);
  for (auto& x : out) x = prior.sample(rng);
  return out;
}

double spatial_rate(const WorldConfig& config) {
  return config.intensity * std::numbers::pi * config.sensing_radius * config.sensing_radius;
}

std::vector<std::int64_t> generate_spatial_sequence(const WorldConfig& config, std::uint64_t seed) {
  if (config.mode != WorldMode::Spatial) throw InvalidParameter("spatial sequence needs a spatial world");
  if (!(config.sensing_radius > 0.0) || !(config.intensity >= 0.0) || !std::isfinite(config.intensity)) {
    throw InvalidParameter("spatial world: need sensing_radius > 0 and intensity >= 0");
  }
  if (!(config.spacing >= 2.0 * config.sensing_radius)) {
    throw InvalidParameter("spatial world: spacing must be at least twice the sensing radius "
                           "so that sensing disks are disjoint");
  }
  const std::size_t n = config.n_stages;
  std::vector<std::int64_t> counts(n, 0);
  if (n == 0 || config.intensity == 0.0) return counts;

  // Waypoints at (k * spacing, 0).
  const double r = config.sensing_radius;
  const double x_min = -r;
  const double x_max = static_cast<double>(n - 1) * config.spacing + r;
  const double width = x_max - x_min;
  const double height = 2.0 * r;

  Rng rng(seed);
  std::poisson_distribution<long long> n_points(config.intensity * width * height);
  const long long total = n_points(rng);
  const double r2 = r * r;
  for (long long p = 0; p < total; ++p) {
    const double x = x_min + width * std::generate_canonical<double, 53>(rng);
    const double y = -r + height * std::generate_canonical<double, 53>(rng);
    const double k = std::round(x / config.spacing);
    if (k < 0.0 || k > static_cast<double>(n - 1)) continue;
    const double dx = x - k * config.spacing;
    if (dx * dx + y * y <= r2) ++counts[static_cast<std::size_t>(k)];
  }
  return counts;
}

const PolicyStats& ExperimentReport::at(std::string_view name) const {
  for (const auto& p : policies) {
    if (p.name == name) return p;
  }
  throw std::out_of_range("no policy '" + std::string(name) + "' in report");
}

double standard_error(std::span<const double> values) {
  const std::size_t n = values.size();
  if (n < 2) return 0.0;
  const double m = mean_of(values);
  double ss = 0.0;
  for (const double x : values) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1)) / std::sqrt(static_cast<double>(n));
}

double paired_difference_sem(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw InvalidParameter("paired_difference_sem: length mismatch");
  std::vector<double> d(a.size());
  for (std::size_t t = 0; t < a.size(); ++t) d[t] = a[t] - b[t];
  return standard_error(d);
}

ExperimentReport run_experiment(const ExperimentConfig& config) {
  if (config.n_trials < 1) throw InvalidParameter("experiment: need at least one trial");
  if (config.policies.empty()) throw InvalidParameter("experiment: no policies");
  const std::size_t n_stages = config.world.n_stages;
  if (config.world.mode == WorldMode::Iid && !config.world.generator) {
    throw InvalidParameter("experiment: iid world needs a generating prior");
  }

  std::vector<Policy> policies;
  policies.reserve(config.policies.size());
  for (auto spec : config.policies) {
    if (!spec.prior) spec.prior = config.prior;
    policies.emplace_back(std::move(spec), n_stages, config.n_robots);
  }
  const Policy oracle_policy(PolicySpec{PolicyKind::Oracle, nullptr, std::nullopt}, n_stages,
                             config.n_robots);

  const std::size_t n_trials = config.n_trials;
  const std::size_t n_policies = policies.size();
  std::vector<double> rewards(n_trials * n_policies, 0.0);
  std::vector<double> oracle_rewards(n_trials, 0.0);

  auto run_trial = [&](std::size_t t) {
    const std::uint64_t world_seed = derive_seed(config.master_seed, t, 0);
    std::vector<double> sequence;
    if (config.world.mode == WorldMode::Iid) {
      sequence = generate_iid_sequence(*config.world.generator, n_stages, world_seed);
    } else {
      const auto counts = generate_spatial_sequence(config.world, world_seed);
      sequence.assign(counts.begin(), counts.end());
    }
    const std::uint64_t policy_seed = derive_seed(config.master_seed, t, 1);
    oracle_rewards[t] = selection_reward(sequence, oracle_policy.select(sequence, policy_seed));
    for (std::size_t p = 0; p < n_policies; ++p) {
      rewards[t * n_policies + p] = selection_reward(sequence, policies[p].select(sequence, policy_seed));
    }
  };

  std::size_t n_threads = config.threads == 0 ? std::max(1u, std::thread::hardware_concurrency())
                                              : config.threads;
  n_threads = std::min(n_threads, n_trials);

  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_trial = n_trials;
  std::string failure_message;
  auto worker = [&] {
    for (std::size_t t = next++; t < n_trials; t = next++) {
      try {
        run_trial(t);
      } catch (const std::exception& e) {
        std::lock_guard lock(failure_mutex);
        if (t < failed_trial) {
          failed_trial = t;
          failure_message = e.what();
        }
      }
    }
  };
  if (n_threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t k = 0; k < n_threads; ++k) pool.emplace_back(worker);
  }
  if (failed_trial < n_trials) throw TrialFailure(failed_trial, failure_message);

  ExperimentReport report;
  report.n_stages = n_stages;
  report.n_robots = config.n_robots;
  report.n_trials = n_trials;
  report.master_seed = config.master_seed;
  for (std::size_t p = 0; p < n_policies; ++p) {
    PolicyStats stats;
    stats.name = std::string(policies[p].name());
    stats.rewards.resize(n_trials);
    stats.utilities.resize(n_trials);
    for (std::size_t t = 0; t < n_trials; ++t) {
      stats.rewards[t] = rewards[t * n_policies + p];
      stats.utilities[t] = policies[p].kind() == PolicyKind::Oracle
                               ? 1.0
                               : utility_of(stats.rewards[t], oracle_rewards[t]);
    }
    stats.mean_reward = mean_of(stats.rewards);
    stats.reward_sem = standard_error(stats.rewards);
    stats.mean_utility = mean_of(stats.utilities);
    stats.utility_sem = standard_error(stats.utilities);
    report.policies.push_back(std::move(stats));
  }
  return report;
}

nlohmann::json report_to_json(const ExperimentReport& report) {
  nlohmann::json j;
  j["stages"] = report.n_stages;
  j["robots"] = report.n_robots;
  j["trials"] = report.n_trials;
  j["master_seed"] = report.master_seed;
  auto& list = j["policies"] = nlohmann::json::array();
  for (const auto& p : report.policies) {
    list.push_back({{"policy", p.name},
                    {"mean_reward", p.mean_reward},
                    {"reward_sem", p.reward_sem},
                    {"mean_utility", p.mean_utility},
                    {"utility_sem", p.utility_sem},
                    {"rewards", p.rewards},
                    {"utilities", p.utilities}});
  }
  return j;
}

void write_report_csv(const ExperimentReport& report, std::ostream& out) {
  out << "policy,mean_reward,utility_pct,sem\n";
  for (const auto& p : report.policies) {
    out << p.name << ',' << csv::format_double(p.mean_reward) << ','
        << csv::format_double(100.0 * p.mean_utility) << ',' << csv::format_double(100.0 * p.utility_sem)
        << '\n';
  }
}

}  // namespace ssap
