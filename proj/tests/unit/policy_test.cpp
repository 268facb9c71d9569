#include "pricing/policy.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

#include <gtest/gtest.h>

namespace pricing {
namespace {

class ConstantDemand final : public DemandModel {
 public:
  explicit ConstantDemand(Vec g) : g_(std::move(g)) {}
  std::size_t ladder_size() const override { return g_.size(); }

 protected:
  double predict_raw(std::span<const double>, std::size_t j) const override { return g_[j]; }

 private:
  Vec g_;
};

Mat random_theta(std::size_t m, std::size_t d, std::mt19937_64& rng, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  Mat theta(m, d + 1);
  for (double& v : theta.data()) v = g(rng);
  return theta;
}

TEST(SoftmaxTest, ZeroThetaIsUniform) {
  const PolicyDist p = policy_probs(Mat(4, 3), Vec{1.0, -2.0});
  for (double v : p.probs()) EXPECT_DOUBLE_EQ(v, 0.25);
}

TEST(SoftmaxTest, SimplexAndShiftInvariance) {
  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    Mat theta = random_theta(5, 2, rng, 3.0);
    const Vec x{0.3, -1.2};
    const PolicyDist p = policy_probs(theta, x);
    double total = 0.0;
    for (double v : p.probs()) {
      EXPECT_GT(v, 0.0);
      total += v;
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    for (std::size_t j = 0; j < 5; ++j) theta(j, 2) += 7.0;  // same bias shift on every arm
    EXPECT_LE(max_abs_diff(policy_probs(theta, x).probs(), p.probs()), 1e-12);
  }
}

TEST(SoftmaxTest, LargeScoresStayFinite) {
  const Mat theta{{1000.0, 0.0}, {0.0, 0.0}};
  const PolicyDist p = policy_probs(theta, Vec{1.0});
  EXPECT_DOUBLE_EQ(p[0], 1.0);
  EXPECT_DOUBLE_EQ(p[1], 0.0);
  EXPECT_THROW(policy_probs(theta, Vec{1.0, 2.0}), DomainError);
}

TEST(GradientTest, MatchesFiniteDifferences) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  const std::size_t m = 3, d = 2;
  std::vector<Vec> xs;
  LossTable table;
  for (int i = 0; i < 30; ++i) {
    xs.push_back(Vec{g(rng), g(rng)});
    table.coef.push_back(Vec{g(rng), g(rng), g(rng)});
  }
  const Mat theta = random_theta(m, d, rng);
  const LossAndGradient lg = empirical_loss_and_gradient(theta, xs, table);
  constexpr double h = 1e-6;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t k = 0; k <= d; ++k) {
      Mat plus = theta;
      Mat minus = theta;
      plus(j, k) += h;
      minus(j, k) -= h;
      const double fd = (empirical_loss_and_gradient(plus, xs, table).loss -
                         empirical_loss_and_gradient(minus, xs, table).loss) /
                        (2 * h);
      EXPECT_NEAR(lg.grad(j, k), fd, 1e-7) << j << "," << k;
    }
  }
  EXPECT_THROW(empirical_loss_and_gradient(theta, xs, LossTable{}), DomainError);
}

TEST(OptimizeTest, ConcentratesOnDominantArm) {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> g;
  std::vector<Vec> xs;
  LossTable table;
  for (int i = 0; i < 50; ++i) {
    xs.push_back(Vec{g(rng)});
    table.coef.push_back(Vec{0.0, -1.0, 0.0});
  }
  const TrainResult res = optimize_policy(xs, table, 3);
  EXPECT_EQ(res.trajectory.size(), TrainConfig{}.max_iters + 1);
  EXPECT_NEAR(res.trajectory.front(), -1.0 / 3.0, 1e-12);
  EXPECT_LT(res.trajectory.back(), res.trajectory.front());
  EXPECT_EQ(res.descent_violations, 0u);
  for (const Vec& x : xs) EXPECT_GE(res.policy.probs(x)[1], 0.95);
}

TEST(OptimizeTest, FeatureDependentOptimum) {
  // Arm 0 pays when x > 0, arm 1 when x < 0.
  std::vector<Vec> xs;
  LossTable table;
  for (int i = -20; i <= 20; ++i) {
    if (i == 0) continue;
    const double x = i / 10.0;
    xs.push_back(Vec{x});
    table.coef.push_back(x > 0 ? Vec{-1.0, 0.0} : Vec{0.0, -1.0});
  }
  const TrainResult res = optimize_policy(xs, table, 2);
  EXPECT_GT(res.policy.probs(Vec{1.5})[0], 0.9);
  EXPECT_GT(res.policy.probs(Vec{-1.5})[1], 0.9);
}

TEST(OptimizeTest, RejectsBadConfig) {
  const std::vector<Vec> xs{Vec{1.0}};
  const LossTable table{{Vec{0.0, 1.0}}};
  TrainConfig cfg;
  cfg.learning_rate = 0.0;
  EXPECT_THROW(optimize_policy(xs, table, 2, cfg), DomainError);
  EXPECT_THROW(optimize_policy(std::vector<Vec>{}, LossTable{}, 2), DomainError);
}

TEST(OptimizeTest, NonFiniteLossIsFatal) {
  const std::vector<Vec> xs{Vec{1.0}};
  const LossTable table{{Vec{std::nan(""), 1.0}}};
  EXPECT_THROW(optimize_policy(xs, table, 2), std::runtime_error);
}

TEST(PolicyJsonTest, RoundTrip) {
  std::mt19937_64 rng(11);
  const LinearSoftmaxPolicy policy(random_theta(3, 2, rng));
  const PriceLadder ladder(Vec{1, 2, 3}, 0.5);
  const nlohmann::json doc = policy.to_json(ladder);
  EXPECT_EQ(doc["kind"], "linear_softmax");
  EXPECT_EQ(doc["unit_cost"], 0.5);
  const LinearSoftmaxPolicy back = LinearSoftmaxPolicy::from_json(doc);
  EXPECT_EQ(back.theta(), policy.theta());
  EXPECT_EQ(back.feature_dim(), 2u);

  nlohmann::json ragged = doc;
  ragged["theta"][1] = Vec{1.0};
  EXPECT_THROW(LinearSoftmaxPolicy::from_json(ragged), DomainError);
  EXPECT_THROW(LinearSoftmaxPolicy::from_json(nlohmann::json{{"kind", "tree"}}), DomainError);
  EXPECT_THROW(LinearSoftmaxPolicy(Mat{{std::nan(""), 0.0}}), DomainError);
}

TEST(GreedyTest, ArgmaxOfExpectedMargin) {
  const PriceLadder ladder(Vec{1, 2, 3});
  EXPECT_EQ(greedy_price(Vec{0.9, 0.5, 0.2}, ladder), 1u);  // 0.9, 1.0, 0.6
  EXPECT_EQ(greedy_price(Vec{0.9, 0.1, 0.1}, ladder), 0u);
  EXPECT_EQ(greedy_price(Vec{0.5, 0.25, 0.125}, ladder), 0u);  // 0.5 ties 0.5
  EXPECT_EQ(greedy_price(Vec{0.5, 0.5, 0.5}, PriceLadder(Vec{1, 2, 3}, 3.0)), 2u);
  EXPECT_THROW(greedy_price(Vec{0.5}, ladder), DomainError);
}

TEST(GreedyTest, TargetPolicyIsDeterministic) {
  const PriceLadder ladder(Vec{1, 2, 3});
  const auto demand = std::make_shared<const ConstantDemand>(Vec{0.9, 0.5, 0.2});
  const PolicyFn target = target_policy_for_evaluation(demand, ladder);
  EXPECT_EQ(target(Vec{}).vec(), (Vec{0, 1, 0}));
  EXPECT_THROW(target_policy_for_evaluation(nullptr, ladder), DomainError);
}

TEST(ExpectedRevenueTest, Example) {
  const PriceLadder ladder(Vec{1, 2, 3}, 0.5);
  EXPECT_NEAR(expected_revenue(PolicyDist(Vec{0.2, 0.5, 0.3}), Vec{0.9, 0.5, 0.2}, ladder),
              0.2 * 0.5 * 0.9 + 0.5 * 1.5 * 0.5 + 0.3 * 2.5 * 0.2, 1e-15);
  EXPECT_THROW(expected_revenue(PolicyDist(Vec{1.0}), Vec{0.5}, ladder), DomainError);
}

TEST(LearningSelectionTest, GridHandling) {
  Dataset data{PriceLadder(Vec{1, 2}), {}, {}};
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g;
  for (int i = 0; i < 10; ++i) {
    data.records.push_back({Vec{g(rng)}, static_cast<std::size_t>(i % 2), i % 3 == 0});
    data.logging.emplace_back(Vec{0.5, 0.5});
  }
  const ConstantDemand demand(Vec{0.6, 0.3});
  const LossTable mv = build_loss_table(data, EstimatorKind::kMv, &demand);
  const LossTable rob = build_loss_table(data, EstimatorKind::kRobust, nullptr);
  TrainConfig cfg;
  cfg.max_iters = 20;
  EXPECT_EQ(select_c_for_learning(data, mv, rob, Vec{0.25}, cfg).value(), 0.25);
  EXPECT_THROW(select_c_for_learning(data, mv, rob, Vec{}, cfg), DomainError);
  EXPECT_THROW(select_c_for_learning(data, mv, rob, Vec{0.0, 1.0}, cfg, 1), DomainError);
  const double c = select_c_for_learning(data, mv, rob, Vec{0.0, 1.0}, cfg).value();
  EXPECT_TRUE(c == 0.0 || c == 1.0);

  EstimatorSpec spec{EstimatorKind::kSwitching};
  const LearnedPolicy learned = optimize_policy(data, spec, &demand, cfg);
  ASSERT_TRUE(learned.c.has_value());
  spec.c = 0.3;
  EXPECT_EQ(*optimize_policy(data, spec, &demand, cfg).c, 0.3);
  EXPECT_FALSE(optimize_policy(data, EstimatorSpec{EstimatorKind::kIps}, nullptr, cfg).c);
}

}  // namespace
}  // namespace pricing
