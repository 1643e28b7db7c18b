#include "ssap/thresholds.hpp"

#include <algorithm>
#include <ostream>
#include <stdexcept>
#include <string>

#include "ssap/errors.hpp"

namespace ssap {

namespace {

// a * Pr(X <= a), zero for the -inf sentinel.
double lower_term(const Prior& prior, ExtendedReal a) {
  if (!a.is_finite()) return 0.0;
  return a.value() * prior.cdf(a);
}

// a * Pr(X > a), zero for the +inf sentinel.
double upper_term(const Prior& prior, ExtendedReal a) {
  if (!a.is_finite()) return 0.0;
  return a.value() * prior.survival(a);
}

ExtendedReal clamped_expectation(const Prior& prior, ExtendedReal lo, ExtendedReal hi) {
  double v = lower_term(prior, lo) + prior.partial_expectation(lo, hi) + upper_term(prior, hi);
  // Rounding can push the sum a few ulps outside [lo, hi].
  if (lo.is_finite()) v = std::max(v, lo.value());
  if (hi.is_finite()) v = std::min(v, hi.value());
  return ExtendedReal::finite(v);
}

}  // namespace

ThresholdTable::ThresholdTable(std::size_t n_stages, std::size_t n_robots)
    : n_stages_(n_stages), n_robots_(n_robots) {
  if (n_robots < 1 || n_robots > n_stages) {
    throw Infeasible("need 1 <= robots <= stages (robots = " + std::to_string(n_robots) +
                     ", stages = " + std::to_string(n_stages) + ")");
  }
  column_start_.reserve(n_stages + 2);
  std::size_t offset = 0;
  for (std::size_t n = 0; n <= n_stages; ++n) {
    column_start_.push_back(offset);
    offset += n - first_index(n) + 1;
  }
  column_start_.push_back(offset);
  cells_.assign(offset, ExtendedReal::neg_inf());
}

ExtendedReal& ThresholdTable::cell(std::size_t i, std::size_t n) {
  return cells_[column_start_[n] + (i - first_index(n))];
}

ExtendedReal ThresholdTable::at(std::size_t i, std::size_t n) const {
  if (!contains(i, n)) {
    throw std::out_of_range("threshold a(" + std::to_string(i) + ", " + std::to_string(n) +
                            ") is outside the stored window");
  }
  return cells_[column_start_[n] + (i - first_index(n))];
}

ExtendedReal ThresholdTable::deploy_threshold(std::size_t n_remaining, std::size_t r_remaining) const {
  if (r_remaining > n_remaining) {
    throw Infeasible(std::to_string(r_remaining) + " robots cannot deploy in " +
                     std::to_string(n_remaining) + " remaining stages");
  }
  if (n_remaining < 1 || n_remaining > n_stages_ || r_remaining < 1 || r_remaining > n_robots_) {
    throw std::out_of_range("decision (n = " + std::to_string(n_remaining) +
                            ", r = " + std::to_string(r_remaining) + ") is outside the table");
  }
  return at(n_remaining - r_remaining, n_remaining);
}

std::span<const ExtendedReal> ThresholdTable::column(std::size_t n) const {
  if (n > n_stages_) throw std::out_of_range("column " + std::to_string(n) + " is outside the table");
  return std::span<const ExtendedReal>(cells_).subspan(column_start_[n],
                                                        column_start_[n + 1] - column_start_[n]);
}

void ThresholdTable::write_csv(std::ostream& out) const {
  out << "n,i,threshold\n";
  for (std::size_t n = 1; n <= n_stages_; ++n) {
    for (std::size_t i = first_index(n); i <= n; ++i) {
      out << n << ',' << i << ',' << at(i, n).to_string() << '\n';
    }
  }
}

ThresholdTable compute_thresholds(const Prior& prior, std::size_t n_stages, std::size_t n_robots) {
  ThresholdTable table(n_stages, n_robots);
  table.cell(0, 0) = ExtendedReal::pos_inf();
  for (std::size_t n = 1; n <= n_stages; ++n) {
    table.cell(n, n) = ExtendedReal::pos_inf();
    if (table.first_index(n) == 0) table.cell(0, n) = ExtendedReal::neg_inf();
    // Interior cells of column n from column n - 1.
    const std::size_t lo_i = std::max<std::size_t>(table.first_index(n), 1);
    for (std::size_t i = lo_i; i < n; ++i) {
      table.cell(i, n) = clamped_expectation(prior, table.at(i - 1, n - 1), table.at(i, n - 1));
    }
  }
  return table;
}

DeployDecision decide(const ThresholdTable& table, std::size_t n_remaining, std::size_t r_remaining,
                      double x) {
  const ExtendedReal threshold = table.deploy_threshold(n_remaining, r_remaining);
  DeployDecision d;
  d.threshold_used = threshold;
  d.action = threshold.exceeded_by(x) ? Action::Deploy : Action::Hold;
  d.reward_if_deployed = x;
  return d;
}

DeploymentState::DeploymentState(const ThresholdTable& table)
    : table_(&table), robots_remaining_(table.n_robots()) {}

DeployDecision DeploymentState::observe(double x) {
  if (stage_ > table_->n_stages()) throw std::logic_error("all stages already observed");
  const std::size_t n = stages_remaining();
  DeployDecision d;
  if (robots_remaining_ == 0) {
    d.threshold_used = ExtendedReal::pos_inf();
    d.reward_if_deployed = x;
  } else {
    d = decide(*table_, n, robots_remaining_, x);
  }
  if (d.action == Action::Deploy) {
    deployed_.push_back({stage_, x});
    --robots_remaining_;
  }
  ++stage_;
  return d;
}

double DeploymentState::total_reward() const {
  double sum = 0.0;
  for (const auto& d : deployed_) sum += d.reward;
  return sum;
}

OnlineResult run_online(const ThresholdTable& table, std::span<const double> sequence) {
  if (sequence.size() != table.n_stages()) {
    throw InvalidParameter("sequence length " + std::to_string(sequence.size()) +
                           " does not match table stages " + std::to_string(table.n_stages()));
  }
  DeploymentState state(table);
  for (const double x : sequence) state.observe(x);
  OnlineResult result;
  for (const auto& d : state.deployments()) result.indices.push_back(d.stage);
  result.total_reward = state.total_reward();
  return result;
}

}  // namespace ssap
