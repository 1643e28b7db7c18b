#include <cmath>
#include <numbers>
#include <sstream>

#include "doctest.h"
#include "ssap/errors.hpp"
#include "ssap/sim.hpp"

using namespace ssap;

namespace {

// Throws on every draw; used to exercise trial-failure reporting.
class BrokenPrior : public DiscretePrior {
 public:
  BrokenPrior() : DiscretePrior({1.0}, 0) {}
  double sample(Rng&) const override { throw std::runtime_error("sensor offline"); }
};

ExperimentConfig iid_config(double lambda, std::size_t n, std::size_t r, std::size_t trials) {
  ExperimentConfig cfg;
  cfg.world.mode = WorldMode::Iid;
  cfg.world.n_stages = n;
  cfg.world.generator = std::make_shared<PoissonPrior>(lambda);
  cfg.prior = cfg.world.generator;
  cfg.n_robots = r;
  cfg.n_trials = trials;
  cfg.master_seed = 7;
  for (const auto kind : all_policy_kinds()) cfg.policies.push_back({kind, nullptr, std::nullopt});
  return cfg;
}

}  // namespace

TEST_CASE("iid sequences") {
  const PoissonPrior prior(5.0);
  const auto seq = generate_iid_sequence(prior, 100000, 3);
  double mean = 0.0;
  for (const double x : seq) mean += x;
  mean /= static_cast<double>(seq.size());
  CHECK(std::abs(mean - 5.0) < 3.0 * std::sqrt(5.0 / 100000.0));
  CHECK(generate_iid_sequence(prior, 50, 11) == generate_iid_sequence(prior, 50, 11));
  CHECK(generate_iid_sequence(prior, 50, 11) != generate_iid_sequence(prior, 50, 12));

  const DiscretePrior point({1.0}, 4);
  for (const double x : generate_iid_sequence(point, 20, 1)) CHECK(x == 4.0);
}

TEST_CASE("spatial sequences") {
  WorldConfig w;
  w.mode = WorldMode::Spatial;
  w.n_stages = 200;
  w.sensing_radius = 1.5;
  w.spacing = 3.0;
  w.intensity = 0.0;
  for (const auto c : generate_spatial_sequence(w, 1)) CHECK(c == 0);

  w.intensity = 0.8;
  CHECK(spatial_rate(w) == doctest::Approx(0.8 * std::numbers::pi * 2.25));
  CHECK(generate_spatial_sequence(w, 5) == generate_spatial_sequence(w, 5));

  // Mean count over many waypoints approaches intensity * disk area.
  double total = 0.0;
  std::size_t n = 0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    for (const auto c : generate_spatial_sequence(w, s)) {
      total += static_cast<double>(c);
      ++n;
    }
  }
  const double lambda = spatial_rate(w);
  CHECK(std::abs(total / static_cast<double>(n) - lambda) < 4.0 * std::sqrt(lambda / static_cast<double>(n)));

  w.spacing = 2.9;
  CHECK_THROWS_AS(generate_spatial_sequence(w, 1), InvalidParameter);
  w.spacing = 3.0;
  w.mode = WorldMode::Iid;
  CHECK_THROWS_AS(generate_spatial_sequence(w, 1), InvalidParameter);
}

TEST_CASE("derived seeds differ by trial and stream") {
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 1, 0));
  CHECK(derive_seed(1, 0, 0) != derive_seed(1, 0, 1));
  CHECK(derive_seed(1, 0, 0) != derive_seed(2, 0, 0));
  CHECK(derive_seed(9, 4, 1) == derive_seed(9, 4, 1));
}

TEST_CASE("standard error") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  // sample sd = sqrt(5/3)
  CHECK(standard_error(v) == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(standard_error(std::vector<double>{3.0}) == 0.0);
  const std::vector<double> w{0.0, 2.0, 2.0, 5.0};
  CHECK(paired_difference_sem(v, w) == doctest::Approx(standard_error(std::vector<double>{1.0, 0.0, 1.0, -1.0})));
}

TEST_CASE("oracle-only experiment") {
  auto cfg = iid_config(5.0, 30, 3, 20);
  cfg.policies = {{PolicyKind::Oracle, nullptr, std::nullopt}};
  const auto report = run_experiment(cfg);
  REQUIRE(report.policies.size() == 1);
  CHECK(report.at("oracle").mean_utility == 1.0);
  CHECK(report.at("oracle").utility_sem == 0.0);
  CHECK(report.at("oracle").rewards.size() == 20);
}

TEST_CASE("N = R gives every policy the same reward") {
  const auto report = run_experiment(iid_config(5.0, 8, 8, 15));
  const auto& base = report.at("oracle").rewards;
  for (const auto& p : report.policies) {
    CHECK(p.rewards == base);
    CHECK(p.mean_utility == doctest::Approx(1.0));
  }
}

TEST_CASE("experiments are paired and thread-independent") {
  auto cfg = iid_config(5.0, 60, 3, 40);
  cfg.threads = 1;
  const auto serial = run_experiment(cfg);
  cfg.threads = 8;
  const auto parallel = run_experiment(cfg);
  CHECK(report_to_json(serial).dump() == report_to_json(parallel).dump());

  for (std::size_t t = 0; t < 40; ++t) {
    const double best = serial.at("oracle").rewards[t];
    for (const auto& p : serial.policies) CHECK(p.rewards[t] <= best);
    CHECK(serial.at("oracle-p").rewards[t] >= serial.at("csp-p").rewards[t]);
    CHECK(serial.at("oracle-p").rewards[t] >= serial.at("cm-p").rewards[t]);
  }
  CHECK(serial.at("ssap").utility_sem ==
        doctest::Approx(standard_error(serial.at("ssap").utilities)));
}

TEST_CASE("spatial experiment runs") {
  ExperimentConfig cfg;
  cfg.world.mode = WorldMode::Spatial;
  cfg.world.n_stages = 30;
  cfg.world.sensing_radius = 1.0;
  cfg.world.spacing = 2.0;
  cfg.world.intensity = 5.0 / std::numbers::pi;
  cfg.prior = std::make_shared<PoissonPrior>(spatial_rate(cfg.world));
  cfg.n_robots = 2;
  cfg.n_trials = 10;
  cfg.policies = {{PolicyKind::Ssap, nullptr, std::nullopt}, {PolicyKind::Random, nullptr, std::nullopt}};
  const auto report = run_experiment(cfg);
  CHECK(report.at("ssap").mean_utility <= 1.0);
  CHECK(report.at("ssap").mean_utility > 0.0);
}

TEST_CASE("trial failures name the trial") {
  auto cfg = iid_config(5.0, 10, 2, 5);
  cfg.world.generator = std::make_shared<BrokenPrior>();
  cfg.threads = 3;
  try {
    run_experiment(cfg);
    FAIL("expected TrialFailure");
  } catch (const TrialFailure& e) {
    CHECK(e.trial() == 0);
    CHECK(std::string(e.what()).find("sensor offline") != std::string::npos);
  }
  auto bad = iid_config(5.0, 10, 2, 0);
  CHECK_THROWS_AS(run_experiment(bad), InvalidParameter);
}

TEST_CASE("report serialization") {
  const auto report = run_experiment(iid_config(3.0, 12, 2, 6));
  const auto j = report_to_json(report);
  CHECK(j["trials"] == 6);
  CHECK(j["policies"].size() == 6);
  CHECK(j["policies"][0]["rewards"].size() == 6);

  std::ostringstream os;
  write_report_csv(report, os);
  std::istringstream in(os.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "policy,mean_reward,utility_pct,sem");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 6);
  CHECK(os.str().find("\noracle,") != std::string::npos);
}
