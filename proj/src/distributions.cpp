#include "ssap/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "ssap/csv.hpp"
#include "ssap/errors.hpp"

namespace ssap {

namespace {

constexpr double kCmpRelativeCutoff = 1e-12;
constexpr std::size_t kCmpMaxTerms = 1'000'000;
constexpr std::size_t kMaxTableSize = 50'000'000;

double log_add(double a, double b) {
  if (a < b) std::swap(a, b);
  return a + std::log1p(std::exp(b - a));
}

void check_interval(ExtendedReal lo, ExtendedReal hi) {
  if (lo > hi) {
    throw InvalidParameter("partial_expectation: lo (" + lo.to_string() + ") > hi (" +
                           hi.to_string() + ")");
  }
}

double draw_unit(Rng& rng) { return std::generate_canonical<double, 53>(rng); }

std::vector<double> poisson_table(double lambda) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidParameter("poisson: lambda must be positive and finite");
  }
  std::vector<double> pmf;
  for (std::int64_t x = 0;; ++x) {
    const double p = poisson_pmf(lambda, x);
    pmf.push_back(p);
    if (static_cast<double>(x) > lambda && p < 1e-18) break;
    if (pmf.size() > kMaxTableSize) throw InvalidParameter("poisson: lambda too large to tabulate");
  }
  return pmf;
}

std::vector<double> cmp_table(double lambda, double nu, const CmpNormalizer& norm) {
  std::vector<double> pmf(norm.truncation_len);
  const double log_lambda = std::log(lambda);
  for (std::size_t x = 0; x < pmf.size(); ++x) {
    const double xd = static_cast<double>(x);
    pmf[x] = std::exp(xd * log_lambda - nu * std::lgamma(xd + 1.0) - norm.log_z);
  }
  return pmf;
}

std::vector<double> histogram_table(const std::map<std::int64_t, std::uint64_t>& counts,
                                    std::uint64_t total) {
  if (total == 0) throw InvalidParameter("empirical prior: histogram is empty");
  const std::int64_t lo = counts.begin()->first;
  const std::int64_t hi = counts.rbegin()->first;
  const auto span = static_cast<std::uint64_t>(hi - lo) + 1;
  if (span > kMaxTableSize) throw InvalidParameter("empirical prior: value range too wide");
  std::vector<double> pmf(span, 0.0);
  for (const auto& [value, count] : counts) {
    pmf[static_cast<std::size_t>(value - lo)] =
        static_cast<double>(count) / static_cast<double>(total);
  }
  return pmf;
}

std::uint64_t sum_counts(const std::map<std::int64_t, std::uint64_t>& counts) {
  std::uint64_t total = 0;
  for (const auto& [value, count] : counts) total += count;
  return total;
}

double parse_number(const std::string& text, const std::string& spec) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(text, &used);
  } catch (const std::exception&) {
    throw InvalidParameter("prior spec '" + spec + "': bad number '" + text + "'");
  }
  if (used != text.size()) throw InvalidParameter("prior spec '" + spec + "': bad number '" + text + "'");
  return v;
}

}  // namespace

// ---------------------------------------------------------------------------
// DiscretePrior

DiscretePrior::DiscretePrior(std::vector<double> pmf, std::int64_t offset)
    : pmf_(std::move(pmf)), offset_(offset) {
  if (pmf_.empty()) throw InvalidParameter("discrete prior: empty pmf");
  cumulative_.resize(pmf_.size() + 1, 0.0);
  cumulative_x_.resize(pmf_.size() + 1, 0.0);
  long double mass = 0.0L;
  long double moment = 0.0L;
  for (std::size_t k = 0; k < pmf_.size(); ++k) {
    const double p = pmf_[k];
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidParameter("discrete prior: invalid probability");
    mass += p;
    moment += static_cast<long double>(offset_ + static_cast<std::int64_t>(k)) * p;
    cumulative_[k + 1] = static_cast<double>(mass);
    cumulative_x_[k + 1] = static_cast<double>(moment);
  }
  if (std::abs(static_cast<double>(mass) - 1.0) > 1e-6) {
    throw InvalidParameter("discrete prior: probabilities sum to " +
                           csv::format_double(static_cast<double>(mass)));
  }
  expectation_total_ = cumulative_x_.back();
}

std::size_t DiscretePrior::prefix_len(ExtendedReal a) const {
  if (a.is_neg_inf()) return 0;
  if (a.is_pos_inf()) return pmf_.size();
  const double rel = std::floor(a.value()) - static_cast<double>(offset_) + 1.0;
  if (rel <= 0.0) return 0;
  if (rel >= static_cast<double>(pmf_.size())) return pmf_.size();
  return static_cast<std::size_t>(rel);
}

double DiscretePrior::pmf_or_density(double x) const {
  if (x != std::floor(x)) return 0.0;
  const double rel = x - static_cast<double>(offset_);
  if (rel < 0.0 || rel >= static_cast<double>(pmf_.size())) return 0.0;
  return pmf_[static_cast<std::size_t>(rel)];
}

double DiscretePrior::cdf(ExtendedReal a) const {
  if (a.is_pos_inf()) return 1.0;
  return cumulative_[prefix_len(a)];
}

double DiscretePrior::partial_expectation(ExtendedReal lo, ExtendedReal hi) const {
  check_interval(lo, hi);
  return cumulative_x_[prefix_len(hi)] - cumulative_x_[prefix_len(lo)];
}

std::optional<double> DiscretePrior::support_hint() const {
  return static_cast<double>(max_value());
}

double DiscretePrior::sample(Rng& rng) const {
  const double target = draw_unit(rng) * cumulative_.back();
  const auto it = std::upper_bound(cumulative_.begin() + 1, cumulative_.end(), target);
  const auto k = std::min<std::size_t>(static_cast<std::size_t>(it - cumulative_.begin()) - 1,
                                       pmf_.size() - 1);
  return static_cast<double>(offset_ + static_cast<std::int64_t>(k));
}

std::string DiscretePrior::describe() const {
  std::ostringstream os;
  os << "discrete:" << offset_ << ':';
  for (std::size_t k = 0; k < pmf_.size(); ++k) os << (k ? "," : "") << csv::format_double(pmf_[k]);
  return os.str();
}

// ---------------------------------------------------------------------------
// Poisson

double poisson_pmf(double lambda, std::int64_t x) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw InvalidParameter("poisson_pmf: lambda must be positive and finite");
  }
  if (x < 0) return 0.0;
  const double xd = static_cast<double>(x);
  return std::exp(xd * std::log(lambda) - lambda - std::lgamma(xd + 1.0));
}

PoissonPrior::PoissonPrior(double lambda) : DiscretePrior(poisson_table(lambda), 0), lambda_(lambda) {}

std::string PoissonPrior::describe() const { return "poisson:" + csv::format_double(lambda_); }

// ---------------------------------------------------------------------------
// Conway-Maxwell-Poisson

CmpNormalizer cmp_normalizer(double lambda, double nu) {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) throw InvalidParameter("cmp: lambda must be positive");
  if (!(nu >= 0.0) || !std::isfinite(nu)) throw InvalidParameter("cmp: nu must be nonnegative");
  if (nu == 0.0 && lambda >= 1.0) {
    throw DivergentSeries("cmp: normalizer diverges for nu = 0 with lambda >= 1 (lambda = " +
                          csv::format_double(lambda) + ")");
  }
  const double log_lambda = std::log(lambda);
  const double log_cutoff = std::log(kCmpRelativeCutoff);
  CmpNormalizer norm;
  norm.log_z = 0.0;  // x = 0 term is 1
  std::size_t x = 1;
  for (; x < kCmpMaxTerms; ++x) {
    const double xd = static_cast<double>(x);
    const double log_term = xd * log_lambda - nu * std::lgamma(xd + 1.0);
    if (log_term < log_cutoff + norm.log_z) break;
    norm.log_z = log_add(norm.log_z, log_term);
  }
  norm.truncation_len = x;
  return norm;
}

double cmp_pmf(double lambda, double nu, std::int64_t x) {
  const CmpNormalizer norm = cmp_normalizer(lambda, nu);
  if (x < 0) return 0.0;
  const double xd = static_cast<double>(x);
  return std::exp(xd * std::log(lambda) - nu * std::lgamma(xd + 1.0) - norm.log_z);
}

CmpPrior::CmpPrior(double lambda, double nu) : CmpPrior(lambda, nu, cmp_normalizer(lambda, nu)) {}

CmpPrior::CmpPrior(double lambda, double nu, CmpNormalizer norm)
    : DiscretePrior(cmp_table(lambda, nu, norm), 0), lambda_(lambda), nu_(nu), norm_(norm) {}

double CmpPrior::z() const { return std::exp(norm_.log_z); }

std::string CmpPrior::describe() const {
  return "cmp:" + csv::format_double(lambda_) + ":" + csv::format_double(nu_);
}

// ---------------------------------------------------------------------------
// Empirical histogram

EmpiricalPrior::EmpiricalPrior(std::map<std::int64_t, std::uint64_t> counts)
    : EmpiricalPrior(counts, sum_counts(counts)) {}

EmpiricalPrior::EmpiricalPrior(std::map<std::int64_t, std::uint64_t> counts, std::uint64_t total)
    : DiscretePrior(histogram_table(counts, total), total == 0 ? 0 : counts.begin()->first),
      counts_(std::move(counts)),
      total_(total) {}

EmpiricalPrior EmpiricalPrior::from_samples(std::span<const std::int64_t> samples) {
  std::map<std::int64_t, std::uint64_t> counts;
  for (const auto v : samples) ++counts[v];
  return EmpiricalPrior(std::move(counts));
}

std::string EmpiricalPrior::describe() const {
  std::ostringstream os;
  os << "hist:";
  bool first = true;
  for (const auto& [value, count] : counts_) {
    os << (first ? "" : ",") << value << '=' << count;
    first = false;
  }
  return os.str();
}

EmpiricalPrior EmpiricalPrior::load_csv(const std::filesystem::path& path) {
  std::map<std::int64_t, std::uint64_t> counts;
  for (const auto& row : csv::read(path, "value,count")) {
    const auto value = csv::to_int(row, 0);
    const auto count = csv::to_int(row, 1);
    if (count < 0) throw ParseError(row.line, "negative count");
    if (counts.contains(value)) throw ParseError(row.line, "duplicate value " + std::to_string(value));
    counts[value] = static_cast<std::uint64_t>(count);
  }
  if (sum_counts(counts) == 0) throw ParseError(0, path.string() + ": histogram is empty");
  return EmpiricalPrior(std::move(counts));
}

void EmpiricalPrior::save_csv(const std::filesystem::path& path) const {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  out << "value,count\n";
  for (const auto& [value, count] : counts_) out << value << ',' << count << '\n';
}

// ---------------------------------------------------------------------------
// Uniform

UniformPrior::UniformPrior(double lo, double hi) : lo_(lo), hi_(hi) {
  if (!std::isfinite(lo) || !std::isfinite(hi) || !(lo < hi)) {
    throw InvalidParameter("uniform: need finite lo < hi");
  }
}

double UniformPrior::pmf_or_density(double x) const {
  return (x >= lo_ && x <= hi_) ? 1.0 / (hi_ - lo_) : 0.0;
}

double UniformPrior::clamp(ExtendedReal a) const {
  if (a.is_neg_inf()) return lo_;
  if (a.is_pos_inf()) return hi_;
  return std::clamp(a.value(), lo_, hi_);
}

double UniformPrior::cdf(ExtendedReal a) const { return (clamp(a) - lo_) / (hi_ - lo_); }

double UniformPrior::partial_expectation(ExtendedReal lo, ExtendedReal hi) const {
  check_interval(lo, hi);
  const double a = clamp(lo);
  const double b = clamp(hi);
  return (b - a) * (b + a) / (2.0 * (hi_ - lo_));
}

double UniformPrior::sample(Rng& rng) const { return lo_ + (hi_ - lo_) * draw_unit(rng); }

std::string UniformPrior::describe() const {
  return "uniform:" + csv::format_double(lo_) + ":" + csv::format_double(hi_);
}

// ---------------------------------------------------------------------------

double partial_expectation(const Prior& prior, ExtendedReal lo, ExtendedReal hi) {
  check_interval(lo, hi);
  return prior.partial_expectation(lo, hi);
}

CmpFit fit_cmp(const EmpiricalPrior& histogram, std::span<const double> lambda_grid,
               std::span<const double> nu_grid) {
  if (lambda_grid.empty() || nu_grid.empty()) throw InvalidParameter("fit_cmp: empty grid");
  std::vector<double> lambdas(lambda_grid.begin(), lambda_grid.end());
  std::vector<double> nus(nu_grid.begin(), nu_grid.end());
  std::sort(lambdas.begin(), lambdas.end());
  std::sort(nus.begin(), nus.end());

  std::optional<CmpFit> best;
  for (const double lambda : lambdas) {
    for (const double nu : nus) {
      std::optional<CmpPrior> candidate;
      try {
        candidate.emplace(lambda, nu);
      } catch (const DivergentSeries&) {
        continue;
      }
      const std::int64_t lo = std::min<std::int64_t>(0, histogram.min_value());
      const std::int64_t hi = std::max(histogram.max_value(), candidate->max_value());
      double err = 0.0;
      for (std::int64_t x = lo; x <= hi; ++x) {
        const double xd = static_cast<double>(x);
        const double d = candidate->pmf_or_density(xd) - histogram.pmf_or_density(xd);
        err += d * d;
      }
      if (!best || err < best->mse) best = CmpFit{lambda, nu, err};
    }
  }
  if (!best) throw NoFeasibleFit("fit_cmp: every grid candidate has a divergent normalizer");
  return *best;
}

std::vector<double> linear_grid(double start, double stop, double step) {
  if (!(step > 0.0) || !(start <= stop) || !std::isfinite(start) || !std::isfinite(stop)) {
    throw InvalidParameter("grid: need start <= stop and step > 0");
  }
  std::vector<double> out;
  const double slack = 1e-9 * std::max(1.0, std::abs(stop));
  for (std::size_t k = 0;; ++k) {
    const double v = start + static_cast<double>(k) * step;
    if (v > stop + slack) break;
    out.push_back(v);
  }
  return out;
}

PriorPtr parse_prior_spec(const std::string& spec) {
  const auto colon = spec.find(':');
  const std::string kind = spec.substr(0, colon);
  const std::string rest = colon == std::string::npos ? "" : spec.substr(colon + 1);
  if (kind == "hist") {
    if (rest.empty()) throw InvalidParameter("prior spec '" + spec + "': missing histogram path");
    return std::make_shared<EmpiricalPrior>(EmpiricalPrior::load_csv(rest));
  }
  std::vector<double> args;
  if (!rest.empty()) {
    std::size_t start = 0;
    while (true) {
      const auto next = rest.find(':', start);
      args.push_back(parse_number(rest.substr(start, next - start), spec));
      if (next == std::string::npos) break;
      start = next + 1;
    }
  }
  auto need = [&](std::size_t n) {
    if (args.size() != n) {
      throw InvalidParameter("prior spec '" + spec + "': expected " + std::to_string(n) + " parameter(s)");
    }
  };
  if (kind == "poisson") {
    need(1);
    return std::make_shared<PoissonPrior>(args[0]);
  }
  if (kind == "cmp") {
    need(2);
    return std::make_shared<CmpPrior>(args[0], args[1]);
  }
  if (kind == "uniform") {
    need(2);
    return std::make_shared<UniformPrior>(args[0], args[1]);
  }
  throw InvalidParameter("prior spec '" + spec + "': unknown kind (poisson, cmp, uniform, hist)");
}

}  // namespace ssap
