#include "ssap/cli.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <optional>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "ssap/csv.hpp"
#include "ssap/distributions.hpp"
#include "ssap/errors.hpp"
#include "ssap/frontier.hpp"
#include "ssap/policies.hpp"
#include "ssap/sim.hpp"
#include "ssap/thresholds.hpp"

namespace ssap::cli {

namespace {

using nlohmann::json;

// Config-file problems that are not tied to a specific parameter.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct Manifest {
  std::string subcommand;
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::vector<std::string> outputs;
  bool stamp = false;

  json to_json() const {
    json j;
    j["subcommand"] = subcommand;
    j["config"] = config_path.empty() ? json(nullptr) : json(config_path);
    j["seed"] = seed ? json(*seed) : json(nullptr);
    j["outputs"] = outputs;
    j["tool_version"] = kToolVersion;
    j["timestamp"] = stamp ? json(utc_now()) : json(nullptr);
    return j;
  }

  static std::string utc_now() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    std::ostringstream os;
    os << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
    return os.str();
  }
};

std::ofstream open_output(const std::string& path) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("cannot write " + path);
  return f;
}

void write_json_file(const std::string& path, const json& j) {
  auto f = open_output(path);
  f << j.dump(2) << '\n';
}

// CSV outputs cannot embed the manifest, so it goes next to them.
void write_manifest_sidecar(const std::string& csv_path, const Manifest& m) {
  write_json_file(csv_path + ".manifest.json", m.to_json());
}

// ---------------------------------------------------------------------------
// thresholds

struct ThresholdArgs {
  std::string prior;
  std::size_t stages = 0;
  std::size_t robots = 0;
  std::string out;
  bool stamp = false;
};

int cmd_thresholds(const ThresholdArgs& a, std::ostream& out) {
  const auto prior = parse_prior_spec(a.prior);
  const auto table = compute_thresholds(*prior, a.stages, a.robots);
  if (a.out.empty()) {
    table.write_csv(out);
    return kOk;
  }
  auto f = open_output(a.out);
  table.write_csv(f);
  write_manifest_sidecar(a.out, {"thresholds", "", std::nullopt, {a.out}, a.stamp});
  out << "wrote " << a.out << " (" << prior->describe() << ", N=" << a.stages << ", R=" << a.robots << ")\n";
  return kOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimulateArgs {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> trials;
  std::optional<std::size_t> stages;
  std::optional<std::size_t> robots;
  std::optional<double> lambda;
  std::optional<unsigned> threads;
  std::string prior;
  std::string out;
  std::string csv_out;
  bool stamp = false;
};

// Resolved simulate settings; mirrors the config-file schema.
struct SimulateSettings {
  std::size_t stages = 60;
  std::size_t robots = 3;
  std::size_t trials = 150;
  std::uint64_t seed = 1;
  double lambda = 5.0;
  unsigned threads = 0;
  std::string mode = "iid";
  std::optional<double> intensity;
  double sensing_radius = 1.0;
  double spacing = 2.0;
  std::string generator;  // iid only; default poisson:<lambda>
  std::string prior;      // default: the generating distribution
  std::vector<std::string> policies;

  json to_json() const {
    json j;
    j["stages"] = stages;
    j["robots"] = robots;
    j["trials"] = trials;
    j["seed"] = seed;
    j["lambda"] = lambda;
    j["world"] = {{"mode", mode}, {"sensing_radius", sensing_radius}, {"spacing", spacing}};
    if (intensity) j["world"]["intensity"] = *intensity;
    j["generator"] = generator;
    j["prior"] = prior;
    j["policies"] = policies;
    return j;
  }
};

template <typename T>
T get_field(const json& j, const char* key) {
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError(std::string("config: bad value for '") + key + "': " + e.what());
  }
}

SimulateSettings load_settings(const std::string& path) {
  SimulateSettings s;
  if (path.empty()) return s;
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config " + path);
  json j;
  try {
    j = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("config " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config " + path + ": top level must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "stages") s.stages = get_field<std::size_t>(j, "stages");
    else if (key == "robots") s.robots = get_field<std::size_t>(j, "robots");
    else if (key == "trials") s.trials = get_field<std::size_t>(j, "trials");
    else if (key == "seed") s.seed = get_field<std::uint64_t>(j, "seed");
    else if (key == "lambda") s.lambda = get_field<double>(j, "lambda");
    else if (key == "threads") s.threads = get_field<unsigned>(j, "threads");
    else if (key == "generator") s.generator = get_field<std::string>(j, "generator");
    else if (key == "prior") s.prior = get_field<std::string>(j, "prior");
    else if (key == "policies") s.policies = get_field<std::vector<std::string>>(j, "policies");
    else if (key == "world") {
      if (!value.is_object()) throw ConfigError("config: 'world' must be an object");
      for (const auto& [wkey, wvalue] : value.items()) {
        if (wkey == "mode") s.mode = get_field<std::string>(value, "mode");
        else if (wkey == "intensity") s.intensity = get_field<double>(value, "intensity");
        else if (wkey == "sensing_radius") s.sensing_radius = get_field<double>(value, "sensing_radius");
        else if (wkey == "spacing") s.spacing = get_field<double>(value, "spacing");
        else throw ConfigError("config: unknown key 'world." + wkey + "'");
      }
    } else {
      throw ConfigError("config: unknown key '" + key + "'");
    }
  }
  return s;
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  SimulateSettings s = load_settings(a.config);
  if (a.seed) s.seed = *a.seed;
  if (a.trials) s.trials = *a.trials;
  if (a.stages) s.stages = *a.stages;
  if (a.robots) s.robots = *a.robots;
  if (a.lambda) s.lambda = *a.lambda;
  if (a.threads) s.threads = *a.threads;
  if (!a.prior.empty()) s.prior = a.prior;
  if (s.policies.empty()) {
    for (const auto k : all_policy_kinds()) s.policies.emplace_back(policy_name(k));
  }
  if (s.trials < 1) throw ConfigError("simulate: trials must be >= 1");
  if (s.robots < 1 || s.robots > s.stages) {
    throw Infeasible("simulate: need 1 <= robots <= stages");
  }

  ExperimentConfig cfg;
  cfg.world.n_stages = s.stages;
  cfg.n_robots = s.robots;
  cfg.n_trials = s.trials;
  cfg.master_seed = s.seed;
  cfg.threads = s.threads;
  if (s.mode == "iid") {
    cfg.world.mode = WorldMode::Iid;
    if (s.generator.empty() || a.lambda) s.generator = "poisson:" + csv::format_double(s.lambda);
    cfg.world.generator = parse_prior_spec(s.generator);
    if (s.prior.empty()) s.prior = s.generator;
  } else if (s.mode == "spatial") {
    cfg.world.mode = WorldMode::Spatial;
    cfg.world.sensing_radius = s.sensing_radius;
    cfg.world.spacing = s.spacing;
    const double disk = std::numbers::pi * s.sensing_radius * s.sensing_radius;
    if (!s.intensity || a.lambda) s.intensity = s.lambda / disk;
    cfg.world.intensity = *s.intensity;
    s.generator.clear();
    if (s.prior.empty()) s.prior = "poisson:" + csv::format_double(spatial_rate(cfg.world));
  } else {
    throw ConfigError("config: world.mode must be 'iid' or 'spatial'");
  }
  cfg.prior = parse_prior_spec(s.prior);
  for (const auto& name : s.policies) cfg.policies.push_back({policy_kind_from_name(name), nullptr, std::nullopt});

  const ExperimentReport report = run_experiment(cfg);

  Manifest m{"simulate", a.config, s.seed, {}, a.stamp};
  if (!a.out.empty()) m.outputs.push_back(a.out);
  if (!a.csv_out.empty()) m.outputs.push_back(a.csv_out);
  json doc;
  doc["manifest"] = m.to_json();
  doc["settings"] = s.to_json();
  doc["report"] = report_to_json(report);
  if (!a.out.empty()) write_json_file(a.out, doc);
  if (!a.csv_out.empty()) {
    auto f = open_output(a.csv_out);
    write_report_csv(report, f);
    write_manifest_sidecar(a.csv_out, m);
  }

  out << "N=" << s.stages << " R=" << s.robots << " trials=" << s.trials << " seed=" << s.seed << " prior="
      << cfg.prior->describe() << '\n';
  out << std::left << std::setw(10) << "policy" << std::right << std::setw(14) << "mean_reward" << std::setw(12)
      << "utility%" << std::setw(10) << "sem%" << '\n';
  for (const auto& p : report.policies) {
    out << std::left << std::setw(10) << p.name << std::right << std::fixed << std::setprecision(3)
        << std::setw(14) << p.mean_reward << std::setw(12) << 100.0 * p.mean_utility << std::setw(10)
        << 100.0 * p.utility_sem << '\n';
  }
  out.unsetf(std::ios::floatfield);
  return kOk;
}

// ---------------------------------------------------------------------------
// frontier

struct FrontierArgs {
  std::string grid;
  std::string path;
  double spacing = 2.5;
  double radius = 10.0;
  std::string out;
  std::string hist_out;
  bool stamp = false;
};

int cmd_frontier(const FrontierArgs& a, std::ostream& out) {
  const auto grid = frontier::VoxelGrid::load(a.grid);
  const auto path = frontier::PathTrace::load_csv(a.path);
  const auto rewards = frontier::rewards_along_path(grid, path, a.spacing, a.radius);
  Manifest m{"frontier", a.grid, std::nullopt, {}, a.stamp};
  if (!a.out.empty()) m.outputs.push_back(a.out);
  if (!a.hist_out.empty()) m.outputs.push_back(a.hist_out);
  if (a.out.empty()) {
    frontier::write_rewards_csv(rewards, out);
  } else {
    auto f = open_output(a.out);
    frontier::write_rewards_csv(rewards, f);
    write_manifest_sidecar(a.out, m);
    out << "wrote " << rewards.size() << " decision points to " << a.out << '\n';
  }
  if (!a.hist_out.empty()) {
    frontier::prior_from_rewards(rewards).save_csv(a.hist_out);
    write_manifest_sidecar(a.hist_out, m);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// compare

struct CompareArgs {
  std::string rewards;
  std::string prior;
  std::size_t robots = 0;
  std::uint64_t seed = 1;
  std::string out;
  bool stamp = false;
};

int cmd_compare(const CompareArgs& a, std::ostream& out) {
  const auto recorded = frontier::load_rewards_csv(a.rewards);
  std::vector<double> sequence;
  for (const auto& p : recorded) sequence.push_back(static_cast<double>(p.reward));
  if (a.robots > sequence.size()) {
    throw Infeasible("compare: " + std::to_string(a.robots) + " robots exceed the " +
                     std::to_string(sequence.size()) + " recorded decision points");
  }
  const auto prior = parse_prior_spec(a.prior);

  const double oracle_reward = selection_reward(sequence, oracle(sequence, a.robots));
  json rows = json::array();
  out << "policy,indices,reward,utility\n";
  for (const auto kind : all_policy_kinds()) {
    const Policy policy({kind, prior, a.seed}, sequence.size(), a.robots);
    const auto picked = policy.select(sequence);
    const double reward = selection_reward(sequence, picked);
    const double utility = oracle_reward == 0.0 ? (reward == 0.0 ? 1.0 : 0.0) : reward / oracle_reward;
    std::string joined;
    for (std::size_t k = 0; k < picked.size(); ++k) joined += (k ? ";" : "") + std::to_string(picked[k]);
    out << policy.name() << ',' << joined << ',' << csv::format_double(reward) << ','
        << csv::format_double(utility) << '\n';
    rows.push_back({{"policy", policy.name()}, {"indices", picked}, {"reward", reward}, {"utility", utility}});
  }
  if (!a.out.empty()) {
    json doc;
    doc["manifest"] = Manifest{"compare", a.rewards, a.seed, {a.out}, a.stamp}.to_json();
    doc["prior"] = prior->describe();
    doc["robots"] = a.robots;
    doc["policies"] = rows;
    write_json_file(a.out, doc);
  }
  return kOk;
}

// ---------------------------------------------------------------------------
// fit-cmp

struct FitArgs {
  std::string hist;
  std::string lambda_grid = "0.5:10:0.5";
  std::string nu_grid = "0:3:0.1";
  std::string out;
  bool stamp = false;
};

std::vector<double> parse_grid(const std::string& text) {
  std::vector<double> parts;
  std::size_t start = 0;
  while (true) {
    const auto next = text.find(':', start);
    const std::string piece = text.substr(start, next - start);
    std::size_t used = 0;
    try {
      parts.push_back(std::stod(piece, &used));
    } catch (const std::exception&) {
      used = std::string::npos;
    }
    if (used != piece.size()) throw InvalidParameter("grid '" + text + "': expected start:stop:step");
    if (next == std::string::npos) break;
    start = next + 1;
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3) throw InvalidParameter("grid '" + text + "': expected start:stop:step");
  return linear_grid(parts[0], parts[1], parts[2]);
}

int cmd_fit_cmp(const FitArgs& a, std::ostream& out) {
  const auto hist = EmpiricalPrior::load_csv(a.hist);
  const auto fit = fit_cmp(hist, parse_grid(a.lambda_grid), parse_grid(a.nu_grid));
  out << "lambda=" << csv::format_double(fit.lambda) << " nu=" << csv::format_double(fit.nu)
      << " squared_error=" << csv::format_double(fit.mse) << '\n';
  if (!a.out.empty()) {
    json doc;
    doc["manifest"] = Manifest{"fit-cmp", a.hist, std::nullopt, {a.out}, a.stamp}.to_json();
    doc["lambda"] = fit.lambda;
    doc["nu"] = fit.nu;
    doc["squared_error"] = fit.mse;
    doc["prior"] = "cmp:" + csv::format_double(fit.lambda) + ":" + csv::format_double(fit.nu);
    write_json_file(a.out, doc);
  }
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Sequential stochastic assignment deployment thresholds and experiments", "ssap"};
  app.set_version_flag("--version", kToolVersion);
  app.require_subcommand(1);

  ThresholdArgs th;
  auto* th_cmd = app.add_subcommand("thresholds", "Compute the deployment threshold table");
  th_cmd->add_option("--prior", th.prior, "poisson:L | cmp:L:NU | uniform:A:B | hist:PATH")->required();
  th_cmd->add_option("--stages", th.stages, "Number of decision stages N")->required()->check(CLI::PositiveNumber);
  th_cmd->add_option("--robots", th.robots, "Number of robots R")->required()->check(CLI::PositiveNumber);
  th_cmd->add_option("--out", th.out, "Threshold CSV (stdout when omitted)");
  th_cmd->add_flag("--timestamp", th.stamp, "Record the wall-clock time in the manifest");

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "Run the repeated-trial policy comparison");
  sim_cmd->add_option("--config", sim.config, "JSON config file")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim.seed, "Master seed");
  sim_cmd->add_option("--trials", sim.trials, "Number of trials")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--stages", sim.stages, "Stages per trial")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--robots", sim.robots, "Robots to deploy")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--lambda", sim.lambda, "Expected features per sensing area")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--prior", sim.prior, "Prior for the threshold policies (default: the generating distribution)");
  sim_cmd->add_option("--threads", sim.threads, "Worker threads (0 = all cores)");
  sim_cmd->add_option("--out", sim.out, "Report JSON");
  sim_cmd->add_option("--csv", sim.csv_out, "Report CSV");
  sim_cmd->add_flag("--timestamp", sim.stamp, "Record the wall-clock time in the manifest");

  FrontierArgs fr;
  auto* fr_cmd = app.add_subcommand("frontier", "Frontier-cell rewards along a carrier path");
  fr_cmd->add_option("--grid", fr.grid, "VGRID1 occupancy grid")->required();
  fr_cmd->add_option("--path", fr.path, "Path CSV x,y,z")->required();
  fr_cmd->add_option("--spacing", fr.spacing, "Meters between decision points")->check(CLI::PositiveNumber);
  fr_cmd->add_option("--radius", fr.radius, "Counting radius in meters")->check(CLI::PositiveNumber);
  fr_cmd->add_option("--out", fr.out, "Reward CSV (stdout when omitted)");
  fr_cmd->add_option("--hist-out", fr.hist_out, "Histogram CSV of the rewards");
  fr_cmd->add_flag("--timestamp", fr.stamp, "Record the wall-clock time in the manifest");

  CompareArgs cmp;
  auto* cmp_cmd = app.add_subcommand("compare", "Run every policy on a recorded reward sequence");
  cmp_cmd->add_option("--rewards", cmp.rewards, "Reward CSV from `frontier`")->required();
  cmp_cmd->add_option("--prior", cmp.prior, "Prior for the threshold policies")->required();
  cmp_cmd->add_option("--robots", cmp.robots, "Robots to deploy")->required()->check(CLI::PositiveNumber);
  cmp_cmd->add_option("--seed", cmp.seed, "Seed for the random policy");
  cmp_cmd->add_option("--out", cmp.out, "JSON deployment table");
  cmp_cmd->add_flag("--timestamp", cmp.stamp, "Record the wall-clock time in the manifest");

  FitArgs fit;
  auto* fit_cmd = app.add_subcommand("fit-cmp", "Grid-search CMP parameters for a histogram");
  fit_cmd->add_option("--hist", fit.hist, "Histogram CSV value,count")->required();
  fit_cmd->add_option("--lambda-grid", fit.lambda_grid, "start:stop:step or a single value");
  fit_cmd->add_option("--nu-grid", fit.nu_grid, "start:stop:step or a single value");
  fit_cmd->add_option("--out", fit.out, "Fit JSON");
  fit_cmd->add_flag("--timestamp", fit.stamp, "Record the wall-clock time in the manifest");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsageError;
  }

  try {
    if (*th_cmd) return cmd_thresholds(th, out);
    if (*sim_cmd) return cmd_simulate(sim, out);
    if (*fr_cmd) return cmd_frontier(fr, out);
    if (*cmp_cmd) return cmd_compare(cmp, out);
    if (*fit_cmd) return cmd_fit_cmp(fit, out);
  } catch (const TrialFailure& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  } catch (const std::invalid_argument& e) {  // InvalidParameter, Infeasible, ConfigError
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const DivergentSeries& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const ParseError& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const NoFeasibleFit& e) {
    err << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kRuntimeError;
  }
  return kUsageError;
}

}  // namespace ssap::cli
