// Linear-softmax pricing policies and their training against a corrupted
// loss table.

#ifndef PRICING_POLICY_HPP_
#define PRICING_POLICY_HPP_

#include <span>
#include <vector>

#include <json.hpp>

#include "pricing/demand.hpp"
#include "pricing/densemat.hpp"
#include "pricing/policy_value.hpp"

namespace pricing {

// Softmax of theta * [x; 1]; theta is m x (d+1), bias last.
PolicyDist policy_probs(const Mat& theta, std::span<const double> x);

class LinearSoftmaxPolicy {
 public:
  LinearSoftmaxPolicy(std::size_t m, std::size_t d) : theta_(m, d + 1) {}
  explicit LinearSoftmaxPolicy(Mat theta);

  PolicyDist probs(std::span<const double> x) const { return policy_probs(theta_, x); }
  PolicyFn as_fn() const;

  const Mat& theta() const { return theta_; }
  std::size_t ladder_size() const { return theta_.rows(); }
  std::size_t feature_dim() const { return theta_.cols() - 1; }

  nlohmann::json to_json(const PriceLadder& ladder) const;
  static LinearSoftmaxPolicy from_json(const nlohmann::json& doc);

 private:
  Mat theta_;
};

struct TrainConfig {
  double learning_rate = 0.05;
  std::size_t max_iters = 2000;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

struct LossAndGradient {
  double loss = 0.0;
  Mat grad;
};

// Mean over records of a_i . softmax(theta [x_i; 1]) and its gradient.
LossAndGradient empirical_loss_and_gradient(const Mat& theta,
                                            const std::vector<Vec>& features,
                                            const LossTable& table);

inline constexpr std::size_t kDescentWindow = 200;
inline constexpr double kDescentSlack = 1e-6;

struct TrainResult {
  LinearSoftmaxPolicy policy;
  Vec trajectory;  // loss before each update, then the final loss
  // Iterations whose loss exceeds the loss kDescentWindow steps earlier by
  // more than kDescentSlack. Reported, never fatal.
  std::size_t descent_violations = 0;
};

// Full-batch Adam from theta = 0. Throws std::runtime_error if the loss
// turns non-finite.
TrainResult optimize_policy(const std::vector<Vec>& features, const LossTable& table,
                            std::size_t ladder_size, const TrainConfig& config = {});

// Chooses c for learning: for each grid value, trains on k-1 folds with the
// switching loss at that c and scores the held-out estimated loss with the
// same estimator; the lowest mean held-out loss wins.
SwitchingWeight select_c_for_learning(const Dataset& data, const LossTable& mv,
                                      const LossTable& rob, std::span<const double> grid,
                                      const TrainConfig& config,
                                      std::size_t folds = kDefaultFolds);

struct LearnedPolicy {
  TrainResult train;
  std::optional<double> c;
};

// Builds the estimator's loss table and trains on it. Switching without a
// fixed c selects one with select_c_for_learning first.
LearnedPolicy optimize_policy(const Dataset& data, const EstimatorSpec& spec,
                              const DemandModel* demand, const TrainConfig& config = {});

// Deterministic argmax_j (p_j - C) g_j(x); ties go to the lower index.
std::size_t greedy_price(std::span<const double> demand, const PriceLadder& ladder);
PolicyFn target_policy_for_evaluation(std::shared_ptr<const DemandModel> demand,
                                      const PriceLadder& ladder);

// Expected revenue sum_j pi(j) (p_j - C) g_j(x) under a known demand.
double expected_revenue(const PolicyDist& pi, std::span<const double> demand,
                        const PriceLadder& ladder);

}  // namespace pricing

#endif  // PRICING_POLICY_HPP_
