// Simulation sweeps behind the pricebench tool: off-policy evaluation error,
// learned-policy reward, and the sales-probability regimes.

#ifndef PRICING_EXPERIMENTS_HPP_
#define PRICING_EXPERIMENTS_HPP_

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "pricing/estimators.hpp"
#include "pricing/policy.hpp"
#include "pricing/synthgen.hpp"

namespace pricing {

struct ExperimentConfig {
  std::string experiment = "eval-sweep";
  std::vector<std::size_t> n_grid{50, 2000};
  std::size_t d = kDefaultFeatureDim;
  Vec ladder{1, 2, 3, 4, 5};
  double unit_cost = 0.0;
  double lambda = 5.0;
  // Empty: MV/CMix use a T-learner fit on the observational data.
  // Otherwise one run per alpha with the blended true demand.
  Vec alpha_grid;
  Vec shifts{0.0};
  std::size_t reps = 500;
  std::size_t learn_reps = 20;  // learning half of sales-regime
  std::uint64_t seed = 1;
  std::vector<EstimatorKind> estimators{EstimatorKind::kIps, EstimatorKind::kMv,
                                        EstimatorKind::kRobust, EstimatorKind::kSwitching};
  TrainConfig train;
  std::size_t cv_folds = kDefaultFolds;
  SurfaceVariant variant = SurfaceVariant::kBase;
  std::size_t n_target_train = 100;  // records used to fit the evaluated policy
  std::size_t test_size = 10000;     // fresh features scoring a learned policy
};

// Missing keys keep their defaults; unknown keys and bad values throw
// DomainError. "n" is accepted as a one-element n_grid and "shift" may be a
// number or a list.
ExperimentConfig parse_experiment_config(const nlohmann::json& doc);
nlohmann::json to_json(const ExperimentConfig& cfg);

// FNV-1a 64 of the canonical (sorted-key, compact) JSON, as 16 hex digits.
std::string config_hash(const ExperimentConfig& cfg);

struct EvalRepOutcome {
  double truth = 0.0;  // mean valuation loss on the observational records
  // Aligned with cfg.estimators; one entry per alpha (or one in fitted mode).
  std::vector<std::vector<double>> estimate;
  std::vector<std::optional<double>> c;  // per alpha, CMix weight if used
};

// One replication of the evaluation protocol at sample size n and logit
// shift. Data depend on (seed, n, shift, rep) only, so every alpha sees the
// same records.
EvalRepOutcome run_eval_rep(const ExperimentConfig& cfg, std::size_t n, double shift,
                            std::size_t rep);

struct LearnRepOutcome {
  std::vector<double> test_reward;  // aligned with cfg.estimators
  std::vector<std::optional<double>> c;
  std::vector<std::size_t> descent_violations;
};

LearnRepOutcome run_learn_rep(const ExperimentConfig& cfg, std::size_t n, double shift,
                              std::size_t rep);

struct ResultRow {
  std::string experiment;
  std::string method;
  std::size_t n = 0;
  std::optional<double> alpha;  // unset prints "fitted"
  double shift = 0.0;
  std::optional<std::size_t> rep;  // unset prints "all"
  std::string metric;
  double value = 0.0;
  std::optional<double> stderr_value;
  std::uint64_t seed = 0;
  std::string config_hash;
};

std::string results_header();
std::string format_row(const ResultRow& row);
void write_results(std::ostream& out, const std::vector<ResultRow>& rows);

// Appends mean/stderr/count rows for every (experiment, method, n, alpha,
// shift, metric) group of per-rep rows.
std::vector<ResultRow> aggregate(const std::vector<ResultRow>& per_rep);

struct Summary {
  double mean = 0.0;
  double stderr_value = 0.0;
  std::size_t count = 0;
};
Summary summarize(std::span<const double> values);

std::vector<ResultRow> eval_sweep(const ExperimentConfig& cfg);
std::vector<ResultRow> learn_sweep(const ExperimentConfig& cfg);
// Evaluation (cfg.reps) and learning (cfg.learn_reps) at each shift.
std::vector<ResultRow> sales_regime(const ExperimentConfig& cfg);

}  // namespace pricing

#endif  // PRICING_EXPERIMENTS_HPP_
