#include "ssap/policies.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <random>
#include <string>

#include "ssap/errors.hpp"

namespace ssap {

namespace {

constexpr std::pair<PolicyKind, std::string_view> kNames[] = {
    {PolicyKind::Ssap, "ssap"},
    {PolicyKind::Oracle, "oracle"},
    {PolicyKind::PartitionOracle, "oracle-p"},
    {PolicyKind::PartitionCayleyMoser, "cm-p"},
    {PolicyKind::PartitionSecretary, "csp-p"},
    {PolicyKind::Random, "random"},
};

void check_length(std::span<const double> sequence, std::size_t n_robots) {
  if (n_robots < 1 || n_robots > sequence.size()) {
    throw Infeasible("need 1 <= robots <= sequence length (robots = " + std::to_string(n_robots) +
                     ", length = " + std::to_string(sequence.size()) + ")");
  }
}

std::span<const double> block_of(std::span<const double> sequence, const IndexRange& block) {
  return sequence.subspan(block.first - 1, block.size());
}

// 1-based index of the first maximum.
std::size_t first_argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) - values.begin()) + 1;
}

std::size_t secretary_pick(std::span<const double> block) {
  const auto m = block.size();
  const auto observe = static_cast<std::size_t>(std::floor(static_cast<double>(m) / std::numbers::e));
  const auto best_seen = observe == 0 ? ExtendedReal::neg_inf()
                                      : ExtendedReal::finite(*std::max_element(block.begin(), block.begin() + observe));
  for (std::size_t k = observe; k < m; ++k) {
    if (best_seen.exceeded_by(block[k])) return k + 1;
  }
  return m;
}

std::size_t online_single(const ThresholdTable& table, std::span<const double> block) {
  return run_online(table, block).indices.front();
}

Selection random_over(const Partition& partition, std::uint64_t seed) {
  Rng rng(seed);
  Selection out;
  out.reserve(partition.size());
  for (const auto& block : partition) {
    std::uniform_int_distribution<std::size_t> pick(block.first, block.last);
    out.push_back(pick(rng));
  }
  return out;
}

}  // namespace

std::string_view policy_name(PolicyKind kind) {
  for (const auto& [k, name] : kNames) {
    if (k == kind) return name;
  }
  return "unknown";
}

PolicyKind policy_kind_from_name(std::string_view name) {
  for (const auto& [k, n] : kNames) {
    if (n == name) return k;
  }
  throw InvalidParameter("unknown policy '" + std::string(name) +
                         "' (expected ssap, oracle, oracle-p, cm-p, csp-p, random)");
}

std::vector<PolicyKind> all_policy_kinds() {
  std::vector<PolicyKind> out;
  for (const auto& [k, name] : kNames) out.push_back(k);
  return out;
}

Partition make_partition(std::size_t n_stages, std::size_t n_robots) {
  if (n_robots < 1 || n_robots > n_stages) {
    throw Infeasible("cannot split " + std::to_string(n_stages) + " stages into " +
                     std::to_string(n_robots) + " partitions");
  }
  const std::size_t base = n_stages / n_robots;
  const std::size_t extra = n_stages % n_robots;
  Partition out;
  out.reserve(n_robots);
  std::size_t next = 1;
  for (std::size_t b = 0; b < n_robots; ++b) {
    const std::size_t len = base + (b < extra ? 1 : 0);
    out.push_back({next, next + len - 1});
    next += len;
  }
  return out;
}

double selection_reward(std::span<const double> sequence, const Selection& selection) {
  double sum = 0.0;
  for (const auto idx : selection) sum += sequence[idx - 1];
  return sum;
}

Selection oracle(std::span<const double> sequence, std::size_t n_robots) {
  check_length(sequence, n_robots);
  std::vector<std::size_t> order(sequence.size());
  std::iota(order.begin(), order.end(), std::size_t{1});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return sequence[a - 1] > sequence[b - 1]; });
  Selection out(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_robots));
  std::sort(out.begin(), out.end());
  return out;
}

Selection partition_oracle(std::span<const double> sequence, std::size_t n_robots) {
  check_length(sequence, n_robots);
  Selection out;
  for (const auto& block : make_partition(sequence.size(), n_robots)) {
    out.push_back(block.first - 1 + first_argmax(block_of(sequence, block)));
  }
  return out;
}

Selection partition_cayley_moser(std::span<const double> sequence, const Prior& prior,
                                 std::size_t n_robots) {
  check_length(sequence, n_robots);
  Selection out;
  for (const auto& block : make_partition(sequence.size(), n_robots)) {
    const auto table = compute_thresholds(prior, block.size(), 1);
    out.push_back(block.first - 1 + online_single(table, block_of(sequence, block)));
  }
  return out;
}

Selection partition_secretary(std::span<const double> sequence, std::size_t n_robots) {
  check_length(sequence, n_robots);
  Selection out;
  for (const auto& block : make_partition(sequence.size(), n_robots)) {
    out.push_back(block.first - 1 + secretary_pick(block_of(sequence, block)));
  }
  return out;
}

Selection random_policy(std::span<const double> sequence, std::size_t n_robots, std::uint64_t seed) {
  check_length(sequence, n_robots);
  return random_over(make_partition(sequence.size(), n_robots), seed);
}

Selection ssap_policy(std::span<const double> sequence, const Prior& prior, std::size_t n_robots) {
  check_length(sequence, n_robots);
  return run_online(compute_thresholds(prior, sequence.size(), n_robots), sequence).indices;
}

// ---------------------------------------------------------------------------

Policy::Policy(PolicySpec spec, std::size_t n_stages, std::size_t n_robots)
    : spec_(std::move(spec)),
      n_stages_(n_stages),
      n_robots_(n_robots),
      partition_(make_partition(n_stages, n_robots)) {
  const bool needs_prior = spec_.kind == PolicyKind::Ssap || spec_.kind == PolicyKind::PartitionCayleyMoser;
  if (needs_prior && !spec_.prior) {
    throw InvalidParameter("policy '" + std::string(name()) + "' requires a prior");
  }
  if (spec_.kind == PolicyKind::Ssap) {
    full_table_.emplace(compute_thresholds(*spec_.prior, n_stages, n_robots));
  } else if (spec_.kind == PolicyKind::PartitionCayleyMoser) {
    for (const auto& block : partition_) {
      if (!block_tables_.contains(block.size())) {
        block_tables_.emplace(block.size(), compute_thresholds(*spec_.prior, block.size(), 1));
      }
    }
  }
}

Selection Policy::select(std::span<const double> sequence) const {
  if (spec_.kind == PolicyKind::Random && !spec_.seed) {
    throw InvalidParameter("policy 'random' requires a seed");
  }
  return select(sequence, spec_.seed.value_or(0));
}

Selection Policy::select(std::span<const double> sequence, std::uint64_t stream_seed) const {
  if (sequence.size() != n_stages_) {
    throw InvalidParameter("policy '" + std::string(name()) + "' bound to " + std::to_string(n_stages_) +
                           " stages, got a sequence of " + std::to_string(sequence.size()));
  }
  switch (spec_.kind) {
    case PolicyKind::Ssap:
      return run_online(*full_table_, sequence).indices;
    case PolicyKind::Oracle:
      return oracle(sequence, n_robots_);
    case PolicyKind::PartitionOracle:
      return partition_oracle(sequence, n_robots_);
    case PolicyKind::PartitionSecretary:
      return partition_secretary(sequence, n_robots_);
    case PolicyKind::Random:
      return random_over(partition_, stream_seed);
    case PolicyKind::PartitionCayleyMoser: {
      Selection out;
      for (const auto& block : partition_) {
        const auto& table = block_tables_.at(block.size());
        out.push_back(block.first - 1 + online_single(table, block_of(sequence, block)));
      }
      return out;
    }
  }
  throw std::logic_error("unhandled policy kind");
}

}  // namespace ssap
