#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ssap/distributions.hpp"
#include "ssap/thresholds.hpp"

namespace ssap {

enum class PolicyKind { Ssap, Oracle, PartitionOracle, PartitionCayleyMoser, PartitionSecretary, Random };

// Stable CLI identifiers: ssap, oracle, oracle-p, cm-p, csp-p, random.
std::string_view policy_name(PolicyKind kind);
// Throws InvalidParameter for an unknown name.
PolicyKind policy_kind_from_name(std::string_view name);
std::vector<PolicyKind> all_policy_kinds();

struct PolicySpec {
  PolicyKind kind = PolicyKind::Ssap;
  PriorPtr prior;                    // Ssap, PartitionCayleyMoser
  std::optional<std::uint64_t> seed; // Random
};

// Inclusive 1-based stage range.
struct IndexRange {
  std::size_t first;
  std::size_t last;
  std::size_t size() const { return last - first + 1; }
  friend bool operator==(const IndexRange&, const IndexRange&) = default;
};

using Partition = std::vector<IndexRange>;

// R contiguous blocks covering 1..N; the first N mod R blocks get one extra
// stage. Throws Infeasible unless 1 <= R <= N.
Partition make_partition(std::size_t n_stages, std::size_t n_robots);

// Selected stages are 1-based and strictly increasing.
using Selection = std::vector<std::size_t>;

double selection_reward(std::span<const double> sequence, const Selection& selection);

// Top-R values with full foreknowledge; ties to the earlier stage.
Selection oracle(std::span<const double> sequence, std::size_t n_robots);
// Argmax per partition block; ties to the earlier stage.
Selection partition_oracle(std::span<const double> sequence, std::size_t n_robots);
// Single-robot threshold rule run independently inside each block.
Selection partition_cayley_moser(std::span<const double> sequence, const Prior& prior,
                                 std::size_t n_robots);
// Observe floor(m / e) stages of each block, then take the first stage that
// strictly beats the observed max; the block's last stage if none does.
Selection partition_secretary(std::span<const double> sequence, std::size_t n_robots);
// One uniformly random stage per block.
Selection random_policy(std::span<const double> sequence, std::size_t n_robots, std::uint64_t seed);
// Full-horizon threshold policy.
Selection ssap_policy(std::span<const double> sequence, const Prior& prior, std::size_t n_robots);

/// A policy bound to a fixed (N, R), with any threshold tables precomputed so
/// it can be replayed over many sequences. Immutable; select() is
/// thread-safe.
class Policy {
 public:
  Policy(PolicySpec spec, std::size_t n_stages, std::size_t n_robots);

  PolicyKind kind() const { return spec_.kind; }
  std::string_view name() const { return policy_name(spec_.kind); }
  const PolicySpec& spec() const { return spec_; }

  // Uses spec().seed for the random policy.
  Selection select(std::span<const double> sequence) const;
  // Random policy draws from `stream_seed`; other kinds ignore it.
  Selection select(std::span<const double> sequence, std::uint64_t stream_seed) const;

 private:
  PolicySpec spec_;
  std::size_t n_stages_;
  std::size_t n_robots_;
  Partition partition_;
  std::optional<ThresholdTable> full_table_;
  std::map<std::size_t, ThresholdTable> block_tables_;  // keyed by block length
};

}  // namespace ssap
