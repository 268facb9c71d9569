// Dataset-level off-policy estimates.
//
// Every corrupted loss is linear in the evaluated policy's probabilities, so
// each record reduces to a coefficient vector a_i with loss_i(pi) = a_i . pi.
// Evaluation and learning both work from those tables.

#ifndef PRICING_POLICY_VALUE_HPP_
#define PRICING_POLICY_VALUE_HPP_

#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <vector>

#include "pricing/demand.hpp"
#include "pricing/estimators.hpp"
#include "pricing/ladder.hpp"

namespace pricing {

// Row i holds the coefficients of record i.
struct LossTable {
  std::vector<Vec> coef;

  std::size_t size() const { return coef.size(); }
  double loss(std::size_t i, std::span<const double> pi) const;
};

// Coefficients for one estimator family. kSwitching is not accepted here
// (use mix_tables); MV and DR need a demand model.
LossTable build_loss_table(const Dataset& data, EstimatorKind kind,
                           const DemandModel* demand);

// c * mv + (1 - c) * rob, row by row.
LossTable mix_tables(const LossTable& mv, const LossTable& rob, SwitchingWeight c);

// Per-record policies, aligned with the dataset records.
using PolicyTable = std::vector<PolicyDist>;
using PolicyFn = std::function<PolicyDist(std::span<const double>)>;

PolicyTable tabulate_policy(const Dataset& data, const PolicyFn& policy);

Vec per_record_losses(const LossTable& table, const PolicyTable& policy);
double mean_loss(const LossTable& table, const PolicyTable& policy);

// Refits a demand model on a training subset; used for cross-fitting.
using DemandFitter = std::function<std::unique_ptr<DemandModel>(const Dataset&)>;

inline constexpr std::size_t kDefaultFolds = 5;

// Ten evenly spaced points from 0 to 1.
Vec default_c_grid();

// Fold id per record: record i goes to fold i mod k.
std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k);

// Picks c from `grid` by the lowest empirical variance of per-record
// switching losses. When `refit` is set the MV losses are cross-fitted:
// each fold's MV coefficients come from a demand model fit on the other
// folds. Otherwise `demand` is used for all records.
SwitchingWeight select_c_for_evaluation(const Dataset& data, const PolicyTable& policy,
                                        const DemandModel* demand,
                                        const DemandFitter& refit, std::span<const double> grid,
                                        std::size_t folds = kDefaultFolds);

struct EstimatorSpec {
  EstimatorKind kind = EstimatorKind::kRobust;
  // Switching only. Unset means "select by cross validation".
  std::optional<double> c;
  std::size_t folds = kDefaultFolds;
};

struct PolicyValueEstimate {
  double loss = 0.0;        // mean corrupted loss; reward is -loss
  double variance = 0.0;    // sample variance of per-record losses
  std::optional<double> c;  // switching weight used
  Vec per_record;
};

// Throws DomainError when the estimator needs a demand model and none is
// given, or when a record's logging distribution lacks overlap.
PolicyValueEstimate estimate_policy_value(const Dataset& data, const PolicyTable& policy,
                                          const EstimatorSpec& spec,
                                          const DemandModel* demand,
                                          const DemandFitter& refit = {});

}  // namespace pricing

#endif  // PRICING_POLICY_VALUE_HPP_
