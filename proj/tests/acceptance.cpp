// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <algorithm>
#include <boost/math/distributions/chi_squared.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "ssap/cli.hpp"
#include "ssap/distributions.hpp"
#include "ssap/policies.hpp"
#include "ssap/sim.hpp"
#include "ssap/thresholds.hpp"

using namespace ssap;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream f(p);
  std::stringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const auto dir = fs::temp_directory_path() / "ssap_acceptance";
  fs::create_directories(dir);
  return dir / name;
}

int run_cli(const std::vector<std::string>& args, std::string* out = nullptr) {
  std::ostringstream o, e;
  const int code = cli::run(args, o, e);
  if (out) *out = o.str();
  return code;
}

// Random pmf over {0,1,2}; some draws zero out an entry to exercise ties.
std::vector<double> random_pmf3(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> p{u(rng), u(rng), u(rng)};
  if (u(rng) < 0.3) p[rng() % 3] = 0.0;
  double s = p[0] + p[1] + p[2];
  if (s == 0.0) p = {1.0, 0.0, 0.0}, s = 1.0;
  for (auto& x : p) x /= s;
  return p;
}

Outcome brute_force_optimality() {
  const auto start = Clock::now();
  std::mt19937_64 rng(2024);
  double worst = 0.0;
  std::size_t cases = 0;
  for (int trial = 0; trial < 60; ++trial) {
    const auto p = random_pmf3(rng);
    const DiscretePrior prior(p, 0);
    const testing::FinitePmf pmf{p, 0};
    const auto optimal = testing::brute_force_values(pmf, 6, 3);
    for (std::size_t n = 1; n <= 6; ++n) {
      for (std::size_t r = 1; r <= std::min<std::size_t>(n, 3); ++r) {
        const auto table = compute_thresholds(prior, n, r);
        std::size_t total = 1;
        for (std::size_t k = 0; k < n; ++k) total *= 3;
        std::vector<double> seq(n);
        double expected = 0.0;
        for (std::size_t code = 0; code < total; ++code) {
          double weight = 1.0;
          std::size_t c = code;
          for (std::size_t k = 0; k < n; ++k) {
            seq[k] = static_cast<double>(c % 3);
            weight *= p[c % 3];
            c /= 3;
          }
          if (weight == 0.0) continue;
          expected += weight * run_online(table, seq).total_reward;
        }
        worst = std::max(worst, std::abs(expected - optimal[n][r]));
        ++cases;
      }
    }
  }
  const double elapsed = seconds_since(start);
  return {worst <= 1e-9 && elapsed < 10.0,
          std::to_string(cases) + " cases, max |E - V*| = " + fmt("%.3g", worst) + ", " + fmt("%.2f", elapsed) + " s"};
}

Outcome cayley_moser() {
  const std::size_t n_max = 50;
  double worst = 0.0;
  bool spots = true;

  auto check = [&](const Prior& prior, const std::vector<double>& v) {
    const auto table = compute_thresholds(prior, n_max, 1);
    for (std::size_t n = 2; n <= n_max; ++n) {
      worst = std::max(worst, std::abs(table.at(n - 1, n).value() - v[n - 1]));
    }
  };

  // Uniform(0,1): V_{m+1} = (1 + V_m^2) / 2.
  std::vector<double> uni(n_max + 1, 0.0);
  uni[1] = 0.5;
  for (std::size_t m = 1; m < n_max; ++m) uni[m + 1] = (1.0 + uni[m] * uni[m]) / 2.0;
  spots = std::abs(uni[2] - 0.625) < 1e-15 && std::abs(uni[3] - 0.6953125) < 1e-15;
  check(UniformPrior(0.0, 1.0), uni);

  for (const double lambda : {2.0, 5.0}) {
    testing::FinitePmf pmf;
    double term = std::exp(-lambda);
    for (int k = 0; k < 200; ++k) {
      pmf.p.push_back(term);
      term *= lambda / (k + 1);
    }
    const auto v = testing::cayley_moser_values([&](double x) { return pmf.expected_max(x); }, pmf.mean(), n_max);
    check(PoissonPrior(lambda), v);
  }

  const testing::FinitePmf bern{{0.5, 0.5}, 0};
  check(DiscretePrior({0.5, 0.5}, 0),
        testing::cayley_moser_values([&](double x) { return bern.expected_max(x); }, bern.mean(), n_max));

  return {worst <= 1e-9 && spots, "4 priors, n <= 50, max deviation " + fmt("%.3g", worst) +
                                      (spots ? ", uniform V2/V3 spot values match" : ", spot values differ")};
}

Outcome sandwich() {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::size_t checked = 0, violations = 0;
  for (int trial = 0; trial < 100; ++trial) {
    PriorPtr prior;
    switch (trial % 4) {
      case 0: prior = std::make_shared<PoissonPrior>(0.5 + 15.0 * u(rng)); break;
      case 1: prior = std::make_shared<UniformPrior>(-5.0 * u(rng), 1.0 + 10.0 * u(rng)); break;
      case 2: prior = std::make_shared<CmpPrior>(0.5 + 8.0 * u(rng), 0.3 + 2.0 * u(rng)); break;
      default: {
        std::vector<double> p(2 + rng() % 20);
        double s = 0.0;
        for (auto& x : p) s += (x = u(rng) < 0.2 ? 0.0 : u(rng));
        if (s == 0.0) p[0] = s = 1.0;
        for (auto& x : p) x /= s;
        prior = std::make_shared<DiscretePrior>(p, static_cast<std::int64_t>(rng() % 7) - 3);
      }
    }
    const std::size_t n_stages = 1 + rng() % 200;
    const std::size_t n_robots = 1 + rng() % std::min<std::size_t>(n_stages, 10);
    const auto table = compute_thresholds(*prior, n_stages, n_robots);
    for (std::size_t n = 1; n <= n_stages; ++n) {
      for (std::size_t i = table.first_index(n); i <= n; ++i) {
        if (i >= 1 && table.contains(i - 1, n)) {
          ++checked;
          if (!(table.at(i - 1, n) <= table.at(i, n))) ++violations;
        }
        if (n < n_stages && i >= 1 && table.contains(i - 1, n) && table.contains(i, n + 1)) {
          ++checked;
          const auto mid = table.at(i, n + 1);
          if (!(table.at(i - 1, n) <= mid && mid <= table.at(i, n))) ++violations;
        }
      }
    }
  }
  return {violations == 0, "100 priors, " + std::to_string(checked) + " inequalities, " +
                               std::to_string(violations) + " violations"};
}

ExperimentConfig poisson_experiment(std::size_t trials, unsigned threads) {
  ExperimentConfig cfg;
  cfg.world.mode = WorldMode::Iid;
  cfg.world.n_stages = 60;
  cfg.world.generator = std::make_shared<PoissonPrior>(5.0);
  cfg.prior = cfg.world.generator;
  cfg.n_robots = 3;
  cfg.n_trials = trials;
  cfg.master_seed = 1;
  cfg.threads = threads;
  for (const auto kind : all_policy_kinds()) cfg.policies.push_back({kind, nullptr, std::nullopt});
  return cfg;
}

Outcome simulated_reproduction() {
  const auto start = Clock::now();
  const auto report = run_experiment(poisson_experiment(150, 0));
  const double elapsed = seconds_since(start);
  const auto& ssap = report.at("ssap");
  const auto& cm = report.at("cm-p");
  const auto& csp = report.at("csp-p");
  const double gap1 = ssap.mean_utility - cm.mean_utility;
  const double gap2 = cm.mean_utility - csp.mean_utility;
  const double sem1 = paired_difference_sem(ssap.utilities, cm.utilities);
  const double sem2 = paired_difference_sem(cm.utilities, csp.utilities);
  const bool pass = ssap.mean_utility >= 0.93 && gap1 > 2.0 * sem1 && gap2 > 2.0 * sem2 && elapsed < 30.0;
  return {pass, "ssap " + fmt("%.2f%%", 100 * ssap.mean_utility) + ", cm-p " + fmt("%.2f%%", 100 * cm.mean_utility) +
                    ", csp-p " + fmt("%.2f%%", 100 * csp.mean_utility) + "; gaps " + fmt("%.4f", gap1) + " (2 SEM " +
                    fmt("%.4f", 2 * sem1) + "), " + fmt("%.4f", gap2) + " (2 SEM " + fmt("%.4f", 2 * sem2) + "); " +
                    fmt("%.2f", elapsed) + " s"};
}

double min_time(const Prior& prior, std::size_t n, std::size_t r, int reps) {
  double best = 1e300;
  for (int k = 0; k < reps; ++k) {
    const auto start = Clock::now();
    const auto table = compute_thresholds(prior, n, r);
    best = std::min(best, seconds_since(start));
    if (!table.contains(n, n)) return -1.0;
  }
  return best;
}

Outcome complexity() {
  const PoissonPrior prior(5.0);
  const double big = min_time(prior, 10000, 10, 1);
  const double t1 = min_time(prior, 1000, 10, 15);
  const double t2 = min_time(prior, 2000, 10, 15);
  const double t4 = min_time(prior, 4000, 10, 15);
  const double r1 = t2 / t1, r2 = t4 / t2;
  return {big < 2.0 && r1 < 3.0 && r2 < 3.0, "N=1e4 R=10 in " + fmt("%.4f", big) + " s; t(2N)/t(N) = " +
                                                 fmt("%.2f", r1) + ", " + fmt("%.2f", r2)};
}

Outcome frontier_fixture() {
  const std::string fixtures = SSAP_FIXTURE_DIR;
  const auto rewards = scratch("rewards.csv");
  const auto hist = scratch("hist.csv");
  if (run_cli({"frontier", "--grid", fixtures + "/corridor.vgrid", "--path", fixtures + "/corridor_path.csv", "--out",
               rewards.string(), "--hist-out", hist.string()}) != 0) {
    return {false, "frontier subcommand failed"};
  }
  const bool golden = slurp(rewards) == slurp(fixtures + "/corridor_rewards.golden.csv");
  std::string table;
  if (run_cli({"compare", "--rewards", rewards.string(), "--prior", "hist:" + hist.string(), "--robots", "3"},
              &table) != 0) {
    return {false, "compare subcommand failed"};
  }
  double ssap = -1.0, csp = -1.0;
  std::istringstream in(table);
  std::string line;
  while (std::getline(in, line)) {
    const auto utility = [&] { return std::stod(line.substr(line.rfind(',') + 1)); };
    if (line.starts_with("ssap,")) ssap = utility();
    if (line.starts_with("csp-p,")) csp = utility();
  }
  return {golden && ssap >= 0.0 && ssap >= csp,
          std::string(golden ? "golden CSV matches" : "golden CSV differs") + "; ssap utility " + fmt("%.3f", ssap) +
              ", csp-p utility " + fmt("%.3f", csp)};
}

Outcome spatial_consistency() {
  WorldConfig w;
  w.mode = WorldMode::Spatial;
  w.n_stages = 100;
  w.sensing_radius = 1.0;
  w.spacing = 2.0;
  w.intensity = 5.0 / std::numbers::pi;
  const double lambda = spatial_rate(w);

  std::vector<std::uint64_t> counts;
  for (std::uint64_t seed = 0; counts.size() < 10000; ++seed) {
    for (const auto c : generate_spatial_sequence(w, seed)) counts.push_back(c);
  }
  counts.resize(10000);
  const double total = static_cast<double>(counts.size());

  // Bins 0..K-1 each with expected count >= 5, plus a tail bin for >= K.
  std::vector<double> probs;
  double p = std::exp(-lambda), cum = 0.0;
  for (int k = 0; total * p >= 5.0 || k < lambda; ++k) {
    probs.push_back(p);
    cum += p;
    p *= lambda / (k + 1);
  }
  probs.push_back(1.0 - cum);
  std::vector<double> observed(probs.size(), 0.0);
  for (const auto c : counts) observed[std::min<std::size_t>(c, probs.size() - 1)] += 1.0;
  double stat = 0.0;
  for (std::size_t k = 0; k < probs.size(); ++k) {
    const double e = total * probs[k];
    stat += (observed[k] - e) * (observed[k] - e) / e;
  }
  const double dof = static_cast<double>(probs.size() - 1);
  const double p_value = boost::math::cdf(boost::math::complement(boost::math::chi_squared(dof), stat));
  return {p_value >= 0.01, "lambda " + fmt("%.3f", lambda) + ", chi2 " + fmt("%.2f", stat) + " on " +
                               fmt("%.0f", dof) + " dof, p = " + fmt("%.4f", p_value)};
}

Outcome determinism() {
  const auto serial = report_to_json(run_experiment(poisson_experiment(60, 1))).dump();
  const auto parallel = report_to_json(run_experiment(poisson_experiment(60, 8))).dump();
  const auto again = report_to_json(run_experiment(poisson_experiment(60, 8))).dump();

  const auto out = scratch("determinism.json");
  std::vector<std::string> runs;
  for (const char* threads : {"1", "8", "8"}) {
    if (run_cli({"simulate", "--trials", "40", "--seed", "11", "--threads", threads, "--out", out.string()}) != 0) {
      return {false, "simulate subcommand failed"};
    }
    runs.push_back(slurp(out));
  }
  const bool api = serial == parallel && parallel == again;
  const bool cli = runs[0] == runs[1] && runs[1] == runs[2] && !runs[0].empty();
  return {api && cli, std::string("in-process reports ") + (api ? "identical" : "differ") + ", CLI JSON files " +
                          (cli ? "byte-identical" : "differ") + " across 1 and 8 threads"};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"brute-force optimality", brute_force_optimality},
      {"Cayley-Moser equivalence", cayley_moser},
      {"threshold sandwich and ordering", sandwich},
      {"simulated experiment", simulated_reproduction},
      {"complexity scaling", complexity},
      {"frontier fixture", frontier_fixture},
      {"spatial consistency", spatial_consistency},
      {"determinism", determinism},
  };
  int failures = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("criterion %zu %s: %s (%s)\n", k + 1, criteria[k].first.c_str(), o.pass ? "PASS" : "FAIL",
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
