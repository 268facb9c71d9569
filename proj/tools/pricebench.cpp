// pricebench: oracle checks, simulation sweeps and CSV evaluation.
//
// Exit codes: 0 success, 1 oracle failure, 2 bad input.

#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "pricing/dataset_io.hpp"
#include "pricing/experiments.hpp"
#include "pricing/oracle.hpp"
#include "pricing/policy.hpp"
#include "pricing/policy_value.hpp"

namespace {

using namespace pricing;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kBadInput = 2;

struct CommonFlags {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> reps;
  std::string out_path;
};

nlohmann::json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DomainError("cannot open " + path);
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw DomainError(path + ": " + e.what());
  }
}

// Writes to --out when given, stdout otherwise.
class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw DomainError("cannot write " + path);
    }
  }
  std::ostream& stream() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

ExperimentConfig experiment_config(const CommonFlags& flags, const std::string& experiment) {
  nlohmann::json doc = flags.config_path.empty() ? nlohmann::json::object()
                                                 : load_json(flags.config_path);
  if (!doc.contains("experiment")) doc["experiment"] = experiment;
  ExperimentConfig cfg = parse_experiment_config(doc);
  if (flags.seed) cfg.seed = *flags.seed;
  if (flags.reps) {
    cfg.reps = *flags.reps;
    cfg.learn_reps = *flags.reps;
  }
  return cfg;
}

int run_oracle(const CommonFlags& flags, bool break_robust) {
  oracle::SuiteConfig cfg;
  if (!flags.config_path.empty()) {
    const nlohmann::json doc = load_json(flags.config_path);
    cfg.seed = doc.value("seed", cfg.seed);
    cfg.instances = doc.value("instances", cfg.instances);
    cfg.qp_perturbations = doc.value("qp_perturbations", cfg.qp_perturbations);
  }
  if (flags.seed) cfg.seed = *flags.seed;
  cfg.break_robust = break_robust;

  const auto rows = oracle::run_suite(cfg);
  Output out(flags.out_path);
  out.stream() << oracle::csv_header() << '\n';
  bool ok = true;
  for (const auto& r : rows) {
    out.stream() << oracle::csv_row(r) << '\n';
    if (!r.pass) {
      ok = false;
      std::cerr << "FAILED " << oracle::csv_row(r) << '\n';
    }
  }
  return ok ? kOk : kCheckFailed;
}

int run_sweep(const CommonFlags& flags, const std::string& experiment) {
  const ExperimentConfig cfg = experiment_config(flags, experiment);
  std::vector<ResultRow> rows;
  if (experiment == "eval-sweep") {
    rows = eval_sweep(cfg);
  } else if (experiment == "learn-sweep") {
    rows = learn_sweep(cfg);
  } else {
    rows = sales_regime(cfg);
  }
  Output out(flags.out_path);
  write_results(out.stream(), rows);
  return kOk;
}

int run_gen(const CommonFlags& flags) {
  const ExperimentConfig cfg = experiment_config(flags, "gen");
  Rng rng = stream_rng(cfg.seed, 0);
  GenConfig gen;
  gen.d = cfg.d;
  gen.ladder = cfg.ladder;
  gen.lambda = cfg.lambda;
  gen.variant = cfg.variant;
  gen.logit_shift = cfg.shifts.front();
  const Environment env = make_environment(gen, rng);
  const Dataset data = env.sample(cfg.n_grid.front(), rng);
  Output out(flags.out_path);
  write_dataset_csv(out.stream(), data);
  return kOk;
}

// Config for eval-csv: {ladder, unit_cost, propensities, estimators, cv_folds}.
int run_eval_csv(const CommonFlags& flags, const std::string& data_path,
                 const std::string& policy_path) {
  const nlohmann::json doc = flags.config_path.empty() ? nlohmann::json::object()
                                                       : load_json(flags.config_path);
  for (const auto& [key, value] : doc.items()) {
    if (key != "ladder" && key != "unit_cost" && key != "propensities" &&
        key != "estimators" && key != "cv_folds") {
      throw DomainError("unknown eval-csv config key '" + key + "'");
    }
  }
  const PriceLadder ladder(doc.value("ladder", Vec{1, 2, 3, 4, 5}), doc.value("unit_cost", 0.0));
  std::optional<Propensities> constant;
  if (doc.contains("propensities")) constant = Propensities(doc.at("propensities").get<Vec>());
  std::vector<EstimatorKind> kinds;
  for (const auto& name : doc.value("estimators", std::vector<std::string>{"IPS", "Robust"})) {
    kinds.push_back(parse_estimator_kind(name));
  }
  const std::size_t folds = doc.value("cv_folds", kDefaultFolds);

  const Dataset data = read_dataset_csv_file(data_path, ladder, constant);
  if (data.size() == 0) throw DomainError(data_path + " has no records");
  const ValidationReport report = validate(data);

  PolicyTable policy;
  if (policy_path == "logging") {
    policy.reserve(data.size());
    for (const auto& p : data.logging) policy.emplace_back(p.vec());
  } else {
    const LinearSoftmaxPolicy pol = LinearSoftmaxPolicy::from_json(load_json(policy_path));
    if (pol.ladder_size() != ladder.size() || pol.feature_dim() != data.feature_dim()) {
      throw DomainError("policy shape does not match the dataset");
    }
    policy = tabulate_policy(data, pol.as_fn());
  }

  std::optional<TLearnerDemand> demand;
  Output out(flags.out_path);
  out.stream() << "estimator,loss,reward,variance,stderr,c,min_propensity,n,flags\n";
  for (EstimatorKind kind : kinds) {
    if (needs_demand(kind) && !demand) demand = fit_tlearner(data);
    const PolicyValueEstimate e = estimate_policy_value(
        data, policy, EstimatorSpec{kind, std::nullopt, folds}, demand ? &*demand : nullptr,
        [](const Dataset& d) { return std::make_unique<TLearnerDemand>(fit_tlearner(d)); });
    char line[256];
    std::snprintf(line, sizeof line, "%s,%.10g,%.10g,%.10g,%.10g,%s,%.6g,%zu,%zu\n",
                  std::string(to_string(kind)).c_str(), e.loss, -e.loss, e.variance,
                  std::sqrt(e.variance / static_cast<double>(data.size())),
                  e.c ? std::to_string(*e.c).c_str() : "", report.min_logged_propensity,
                  data.size(), report.flags.size());
    out.stream() << line;
  }
  for (const auto& f : report.flags) {
    std::cerr << "record " << f.record << ": " << f.message << '\n';
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Off-policy pricing estimators: oracle checks and simulation sweeps"};
  app.require_subcommand(1);
  CommonFlags flags;
  auto add_common = [&flags](CLI::App* sub) {
    sub->add_option("--config", flags.config_path, "JSON config file");
    sub->add_option("--seed", flags.seed, "Base seed (overrides the config)");
    sub->add_option("--out", flags.out_path, "Output CSV path (default stdout)");
    sub->add_option("--reps", flags.reps, "Replications (overrides the config)");
  };

  bool break_robust = false;
  auto* oracle_cmd = app.add_subcommand("oracle-check", "Run the brute-force oracle suite");
  add_common(oracle_cmd);
  oracle_cmd->add_flag("--break-robust", break_robust,
                       "Perturb the robust matrix (negative control, must fail)");

  auto* eval_cmd = app.add_subcommand("eval-sweep", "Policy evaluation error sweep");
  add_common(eval_cmd);
  auto* learn_cmd = app.add_subcommand("learn-sweep", "Policy learning reward sweep");
  add_common(learn_cmd);
  auto* sales_cmd = app.add_subcommand("sales-regime", "Evaluation and learning per logit shift");
  add_common(sales_cmd);
  auto* gen_cmd = app.add_subcommand("gen", "Write a synthetic dataset CSV");
  add_common(gen_cmd);

  std::string data_path;
  std::string policy_path = "logging";
  auto* csv_cmd = app.add_subcommand("eval-csv", "Evaluate a policy on a logged-data CSV");
  add_common(csv_cmd);
  csv_cmd->add_option("--data", data_path, "Dataset CSV")->required();
  csv_cmd->add_option("--policy", policy_path,
                      "Policy JSON, or 'logging' to evaluate the logging policy");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kBadInput;
  }

  try {
    if (*oracle_cmd) return run_oracle(flags, break_robust);
    if (*eval_cmd) return run_sweep(flags, "eval-sweep");
    if (*learn_cmd) return run_sweep(flags, "learn-sweep");
    if (*sales_cmd) return run_sweep(flags, "sales-regime");
    if (*gen_cmd) return run_gen(flags);
    if (*csv_cmd) return run_eval_csv(flags, data_path, policy_path);
  } catch (const SchemaError& e) {
    std::cerr << "schema error: " << e.what() << '\n';
    return kBadInput;
  } catch (const DomainError& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kBadInput;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "input error: " << e.what() << '\n';
    return kBadInput;
  }
  return kBadInput;
}
