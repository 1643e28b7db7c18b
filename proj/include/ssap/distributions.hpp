#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "ssap/extended_real.hpp"

namespace ssap {

using Rng = std::mt19937_64;

/// Prior distribution f(x) of a single observation.
///
/// Interval queries are half-open: partial_expectation(lo, hi) is
/// E[X * 1(lo < X <= hi)] and cdf(a) is Pr(X <= a). Implementations are
/// immutable after construction and safe to share between threads.
class Prior {
 public:
  virtual ~Prior() = default;

  virtual double pmf_or_density(double x) const = 0;
  virtual double cdf(ExtendedReal a) const = 0;
  virtual double partial_expectation(ExtendedReal lo, ExtendedReal hi) const = 0;
  virtual double mean() const = 0;
  virtual bool is_discrete() const = 0;
  // Upper end of the (possibly truncated) support, when bounded.
  virtual std::optional<double> support_hint() const = 0;
  // One draw by inverse CDF.
  virtual double sample(Rng& rng) const = 0;
  // Compact textual form, e.g. "poisson:5".
  virtual std::string describe() const = 0;

  double cdf(double a) const { return cdf(ExtendedReal::finite(a)); }
  double survival(ExtendedReal a) const { return 1.0 - cdf(a); }
};

using PriorPtr = std::shared_ptr<const Prior>;

/// Finite pmf over the consecutive integers offset, offset+1, ...
///
/// Backs every integer-valued prior. Prefix tables make cdf and
/// partial_expectation O(1) per query.
class DiscretePrior : public Prior {
 public:
  DiscretePrior(std::vector<double> pmf, std::int64_t offset = 0);

  double pmf_or_density(double x) const override;
  double cdf(ExtendedReal a) const override;
  double partial_expectation(ExtendedReal lo, ExtendedReal hi) const override;
  double mean() const override { return expectation_total_; }
  bool is_discrete() const override { return true; }
  std::optional<double> support_hint() const override;
  double sample(Rng& rng) const override;
  std::string describe() const override;

  using Prior::cdf;

  std::int64_t min_value() const { return offset_; }
  std::int64_t max_value() const { return offset_ + static_cast<std::int64_t>(pmf_.size()) - 1; }
  std::span<const double> table() const { return pmf_; }

 private:
  // Number of support points <= a, i.e. prefix length for cdf(a).
  std::size_t prefix_len(ExtendedReal a) const;

  std::vector<double> pmf_;
  std::int64_t offset_;
  std::vector<double> cumulative_;   // cumulative_[k] = sum pmf_[0..k)
  std::vector<double> cumulative_x_; // cumulative_x_[k] = sum x * pmf_[0..k)
  double expectation_total_ = 0.0;
};

// lambda^x e^{-lambda} / x!, evaluated in log space. Throws InvalidParameter
// for lambda <= 0.
double poisson_pmf(double lambda, std::int64_t x);

class PoissonPrior : public DiscretePrior {
 public:
  explicit PoissonPrior(double lambda);
  double lambda() const { return lambda_; }
  std::string describe() const override;

 private:
  double lambda_;
};

/// Conway-Maxwell-Poisson normalizer Z(lambda, nu) by series truncation.
struct CmpNormalizer {
  double log_z = 0.0;
  std::size_t truncation_len = 0;  // terms retained, x = 0..truncation_len-1
};

// Stops once the next term falls below 1e-12 of the running sum, capped at
// 1e6 terms. Throws DivergentSeries for nu = 0 with lambda >= 1.
CmpNormalizer cmp_normalizer(double lambda, double nu);

// lambda^x / (x!)^nu / Z(lambda, nu).
double cmp_pmf(double lambda, double nu, std::int64_t x);

class CmpPrior : public DiscretePrior {
 public:
  CmpPrior(double lambda, double nu);
  double lambda() const { return lambda_; }
  double nu() const { return nu_; }
  double z() const;
  std::size_t truncation_len() const { return norm_.truncation_len; }
  std::string describe() const override;

 private:
  CmpPrior(double lambda, double nu, CmpNormalizer norm);

  double lambda_;
  double nu_;
  CmpNormalizer norm_;
};

/// Histogram prior: pmf(v) = counts[v] / total.
class EmpiricalPrior : public DiscretePrior {
 public:
  explicit EmpiricalPrior(std::map<std::int64_t, std::uint64_t> counts);
  // Tallies raw integer samples.
  static EmpiricalPrior from_samples(std::span<const std::int64_t> samples);

  const std::map<std::int64_t, std::uint64_t>& counts() const { return counts_; }
  std::uint64_t total() const { return total_; }
  std::string describe() const override;

  // Two-column CSV `value,count` with a header row.
  static EmpiricalPrior load_csv(const std::filesystem::path& path);
  void save_csv(const std::filesystem::path& path) const;

 private:
  EmpiricalPrior(std::map<std::int64_t, std::uint64_t> counts, std::uint64_t total);

  std::map<std::int64_t, std::uint64_t> counts_;
  std::uint64_t total_;
};

class UniformPrior : public Prior {
 public:
  UniformPrior(double lo, double hi);

  double pmf_or_density(double x) const override;
  double cdf(ExtendedReal a) const override;
  double partial_expectation(ExtendedReal lo, ExtendedReal hi) const override;
  double mean() const override { return 0.5 * (lo_ + hi_); }
  bool is_discrete() const override { return false; }
  std::optional<double> support_hint() const override { return hi_; }
  double sample(Rng& rng) const override;
  std::string describe() const override;

  using Prior::cdf;

  double lo() const { return lo_; }
  double hi() const { return hi_; }

 private:
  double clamp(ExtendedReal a) const;

  double lo_;
  double hi_;
};

// Throws InvalidParameter (Prior-level message) when lo > hi.
double partial_expectation(const Prior& prior, ExtendedReal lo, ExtendedReal hi);

/// Exhaustive grid search for the CMP parameters minimizing the squared
/// pmf error against a histogram. Ties go to the smaller lambda, then the
/// smaller nu. Divergent candidates are skipped.
struct CmpFit {
  double lambda = 0.0;
  double nu = 0.0;
  double mse = 0.0;
};
CmpFit fit_cmp(const EmpiricalPrior& histogram, std::span<const double> lambda_grid,
               std::span<const double> nu_grid);

// Inclusive arithmetic range start, start+step, ... <= stop (with 1e-9
// relative slack on the end point).
std::vector<double> linear_grid(double start, double stop, double step);

/// Parses `poisson:L`, `cmp:L:NU`, `uniform:A:B`, `hist:PATH`.
PriorPtr parse_prior_spec(const std::string& spec);

}  // namespace ssap
