// Plug-in demand models: per-price sale probabilities g_j(x), and the
// outcome/valuation distributions they imply.

#ifndef PRICING_DEMAND_HPP_
#define PRICING_DEMAND_HPP_

#include <memory>
#include <span>
#include <vector>

#include <json.hpp>

#include "pricing/densemat.hpp"
#include "pricing/ladder.hpp"

namespace pricing {

inline constexpr double kDemandClampLo = 1e-4;
inline constexpr double kDemandClampHi = 1.0 - 1e-4;

double sigmoid(double z);
double logit(double p);

class DemandModel {
 public:
  virtual ~DemandModel() = default;

  virtual std::size_t ladder_size() const = 0;

  // Sale probability at rung j, clamped to [kDemandClampLo, kDemandClampHi].
  double predict(std::span<const double> x, std::size_t j) const;
  Vec predict_all(std::span<const double> x) const;

 protected:
  virtual double predict_raw(std::span<const double> x, std::size_t j) const = 0;
};

// Logistic model, weights = (w_0..w_{d-1}, bias).
struct LogisticPredictor {
  Vec weights;

  double score(std::span<const double> x) const;
  double predict(std::span<const double> x) const { return sigmoid(score(x)); }
};

struct LogisticFitConfig {
  double l2 = 1e-3;  // on weights, not the bias
  std::size_t max_iters = 5000;
  double grad_tol = 1e-6;
};

struct LogisticFitResult {
  LogisticPredictor predictor;
  std::size_t iters = 0;
  double grad_norm = 0.0;  // infinity norm at exit
  bool converged = false;
};

// Minimizes mean log-loss + l2/2 |w|^2 by damped Newton steps. Labels that
// are all equal give a constant predictor at the clamped base rate.
LogisticFitResult fit_logistic(const std::vector<Vec>& features,
                               const std::vector<int>& labels,
                               const LogisticFitConfig& config = {});

// Mean log-loss of a predictor on (features, labels), no penalty.
double log_loss(const LogisticPredictor& predictor, const std::vector<Vec>& features,
                const std::vector<int>& labels);

// One logistic model per rung.
class TLearnerDemand final : public DemandModel {
 public:
  explicit TLearnerDemand(std::vector<LogisticPredictor> per_price);

  std::size_t ladder_size() const override { return per_price_.size(); }
  const LogisticPredictor& predictor(std::size_t j) const { return per_price_.at(j); }

  nlohmann::json to_json() const;
  static TLearnerDemand from_json(const nlohmann::json& doc);

 protected:
  double predict_raw(std::span<const double> x, std::size_t j) const override;

 private:
  std::vector<LogisticPredictor> per_price_;
};

// Fits rung j on the records logged at rung j. A rung with no records gets
// the pooled sale rate over all records as a constant.
TLearnerDemand fit_tlearner(const Dataset& data, const LogisticFitConfig& config = {});

// alpha * truth + (1 - alpha) * 0.01.
class BlendedDemand final : public DemandModel {
 public:
  static constexpr double kUninformedRate = 0.01;

  BlendedDemand(std::shared_ptr<const DemandModel> truth, double alpha);

  std::size_t ladder_size() const override { return truth_->ladder_size(); }
  double alpha() const { return alpha_; }

 protected:
  double predict_raw(std::span<const double> x, std::size_t j) const override;

 private:
  std::shared_ptr<const DemandModel> truth_;
  double alpha_;
};

// Entry j = g_j pi_0(j), entry m + j = (1 - g_j) pi_0(j).
OutcomeDist fY_hat(const DemandModel& model, const Propensities& pi0,
                   std::span<const double> x);

// Same from explicit per-price probabilities.
OutcomeDist outcome_dist_from_demand(std::span<const double> g, const Propensities& pi0);

// Nonincreasing least-squares fit (equal weights) by pool-adjacent-violators.
Vec isotonic_nonincreasing(std::span<const double> values);

struct ValuationPlugIn {
  ValuationDist fv;
  Vec survival;  // repaired P(buys at rung j)
  Vec mu;        // (p_j - C) * survival_j
};

// Survival probabilities g_j are made nonincreasing first; f_V then comes
// from their differences.
ValuationPlugIn fV_hat_and_mu(std::span<const double> g, const PriceLadder& ladder);
ValuationPlugIn fV_hat_and_mu(const DemandModel& model, const PriceLadder& ladder,
                              std::span<const double> x);

}  // namespace pricing

#endif  // PRICING_DEMAND_HPP_
