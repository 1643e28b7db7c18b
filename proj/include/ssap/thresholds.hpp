#pragma once

#include <cstddef>
#include <iosfwd>
#include <span>
#include <vector>

#include "ssap/distributions.hpp"
#include "ssap/extended_real.hpp"

namespace ssap {

/// Assignment thresholds a(i, n) for n = 0..N stages remaining.
///
/// Only the window i = max(0, n - R) .. n is stored: below n - R every
/// interval maps to a zero-valued token, so the finer split never changes a
/// decision. a(n, n) = +inf and a(0, n) = -inf (n >= 1) are sentinels. The
/// n = 0 column holds the single cell a(0, 0) = +inf.
class ThresholdTable {
 public:
  ThresholdTable(std::size_t n_stages, std::size_t n_robots);

  std::size_t n_stages() const { return n_stages_; }
  std::size_t n_robots() const { return n_robots_; }

  // Lowest stored i for column n.
  std::size_t first_index(std::size_t n) const { return n > n_robots_ ? n - n_robots_ : 0; }
  bool contains(std::size_t i, std::size_t n) const {
    return n <= n_stages_ && i >= first_index(n) && i <= n;
  }

  // Throws std::out_of_range outside the window.
  ExtendedReal at(std::size_t i, std::size_t n) const;
  // Threshold an observation must strictly exceed to deploy with r robots
  // left and n stages left: a(n - r, n).
  ExtendedReal deploy_threshold(std::size_t n_remaining, std::size_t r_remaining) const;

  // Column n as stored, from first_index(n) upward.
  std::span<const ExtendedReal> column(std::size_t n) const;

  // CSV `n,i,threshold` over every stored cell with n >= 1, sentinels as
  // `-inf` / `+inf`.
  void write_csv(std::ostream& out) const;

 private:
  friend ThresholdTable compute_thresholds(const Prior&, std::size_t, std::size_t);
  ExtendedReal& cell(std::size_t i, std::size_t n);

  std::size_t n_stages_;
  std::size_t n_robots_;
  std::vector<std::size_t> column_start_;  // offset of column n in cells_
  std::vector<ExtendedReal> cells_;
};

// Column-by-column threshold recurrence. Each new cell is the expectation of
// X clamped to [a(i-1, n), a(i, n)]:
//   a(i, n+1) = a(i-1,n) Pr(X <= a(i-1,n)) + E[X 1(a(i-1,n) < X <= a(i,n))]
//               + a(i,n) Pr(X > a(i,n)),
// with infinite sentinels times zero probability taken as zero.
// Throws Infeasible unless 1 <= R <= N.
ThresholdTable compute_thresholds(const Prior& prior, std::size_t n_stages, std::size_t n_robots);

enum class Action { Deploy, Hold };

struct DeployDecision {
  Action action = Action::Hold;
  ExtendedReal threshold_used;
  double reward_if_deployed = 0.0;
};

// Deploy iff x > a(n - r, n). Throws Infeasible when r > n and
// std::out_of_range when (n, r) lies outside the table.
DeployDecision decide(const ThresholdTable& table, std::size_t n_remaining, std::size_t r_remaining,
                      double x);

/// Online executor: feed observations one stage at a time.
class DeploymentState {
 public:
  struct Deployment {
    std::size_t stage;  // 1-based
    double reward;
  };

  explicit DeploymentState(const ThresholdTable& table);

  // Decides for the next stage. Throws std::logic_error once all N stages
  // have been observed.
  DeployDecision observe(double x);

  std::size_t stage() const { return stage_; }  // next stage, 1-based
  std::size_t stages_remaining() const { return table_->n_stages() - (stage_ - 1); }
  std::size_t robots_remaining() const { return robots_remaining_; }
  const std::vector<Deployment>& deployments() const { return deployed_; }
  double total_reward() const;

 private:
  const ThresholdTable* table_;
  std::size_t stage_ = 1;
  std::size_t robots_remaining_;
  std::vector<Deployment> deployed_;
};

struct OnlineResult {
  std::vector<std::size_t> indices;  // 1-based, increasing
  double total_reward = 0.0;
};

// Throws InvalidParameter unless |sequence| = N.
OnlineResult run_online(const ThresholdTable& table, std::span<const double> sequence);

}  // namespace ssap
