#include "pricing/policy_value.hpp"

#include <random>

#include <gtest/gtest.h>

#include "pricing/losses.hpp"

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

// Records drawn from a fixed valuation law under random logging propensities.
Dataset random_data(std::size_t n, std::uint64_t seed, double cost = 0.0) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.1, 1.0);
  std::normal_distribution<double> feat;
  const PriceLadder ladder(Vec{1, 2, 3}, cost);
  std::discrete_distribution<std::size_t> valuation({0.3, 0.3, 0.2, 0.2});
  Dataset data{ladder, {}, {}};
  for (std::size_t i = 0; i < n; ++i) {
    Vec w{u(rng), u(rng), u(rng)};
    const double total = w[0] + w[1] + w[2];
    for (double& v : w) v /= total;
    std::discrete_distribution<std::size_t> price(w.begin(), w.end());
    const std::size_t j = price(rng);
    const std::size_t s = valuation(rng);
    data.records.push_back({Vec{feat(rng)}, j, s > j, s});
    data.logging.emplace_back(w);
  }
  return data;
}

PolicyTable constant_policy(std::size_t n, const Vec& pi) {
  return PolicyTable(n, PolicyDist(pi));
}

TEST(LossTableTest, ZeroMarginsGiveZeroLoss) {
  const Dataset data = random_data(50, 1, 3.0);
  // Margins are (-2, -1, 0); only the top rung has zero margin, so use a policy on it.
  const PolicyTable pi = constant_policy(50, Vec{0, 0, 1});
  for (EstimatorKind kind : {EstimatorKind::kIps, EstimatorKind::kRobust, EstimatorKind::kCips}) {
    EXPECT_NEAR(mean_loss(build_loss_table(data, kind, nullptr), pi), 0.0, 1e-12)
        << to_string(kind);
  }
}

TEST(LossTableTest, OnPolicyIpsIsEmpiricalRevenue) {
  const Dataset data = random_data(200, 2, 0.5);
  const LossTable ips = build_loss_table(data, EstimatorKind::kIps, nullptr);
  double revenue = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    const double observed = r.sold ? data.ladder.margin(r.price) : 0.0;
    EXPECT_NEAR(ips.loss(i, data.logging[i].probs()), -observed, 1e-12);
    revenue += observed;
  }
  PolicyTable logging;
  for (const auto& p : data.logging) logging.emplace_back(p.vec());
  EXPECT_NEAR(mean_loss(ips, logging), -revenue / 200.0, 1e-12);
}

TEST(LossTableTest, CoefficientsMatchCorruptedLoss) {
  const Dataset data = random_data(20, 3, 0.5);
  const ConstantDemand demand(Vec{0.7, 0.4, 0.2});
  const PolicyDist pi(Vec{0.2, 0.5, 0.3});
  const LossTable mv = build_loss_table(data, EstimatorKind::kMv, &demand);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    const Mat rmv = r_mv(TransferMatrix(data.logging[i]),
                         fY_hat(demand, data.logging[i], r.features))
                        .mat;
    const Vec c = corrupted_loss_vector(rmv, valuation_loss_vector(pi, data.ladder)).values;
    EXPECT_NEAR(mv.loss(i, pi.probs()), c[outcome_index(r.price, r.sold, 3)], 1e-10);
  }
}

TEST(LossTableTest, DemandRequirements) {
  const Dataset data = random_data(5, 4);
  EXPECT_THROW(build_loss_table(data, EstimatorKind::kMv, nullptr), DomainError);
  EXPECT_THROW(build_loss_table(data, EstimatorKind::kDr, nullptr), DomainError);
  EXPECT_THROW(build_loss_table(data, EstimatorKind::kSwitching, nullptr), DomainError);
  EXPECT_NO_THROW(build_loss_table(data, EstimatorKind::kRobust, nullptr));
}

TEST(LossTableTest, OverlapViolationNamesRecord) {
  Dataset data = random_data(5, 5);
  data.logging[3] = Propensities(Vec{0.5, 0.5, 0.0});
  try {
    build_loss_table(data, EstimatorKind::kIps, nullptr);
    FAIL() << "expected overlap error";
  } catch (const DomainError& e) {
    EXPECT_STREQ(e.what(), "overlap violated at record 3");
  }
}

TEST(MixTablesTest, Interpolates) {
  const LossTable a{{Vec{1, 2}, Vec{3, 4}}};
  const LossTable b{{Vec{5, 6}, Vec{7, 8}}};
  const LossTable half = mix_tables(a, b, SwitchingWeight(0.5));
  EXPECT_EQ(half.coef[1], (Vec{5, 6}));
  EXPECT_EQ(mix_tables(a, b, SwitchingWeight(1.0)).coef, a.coef);
  EXPECT_EQ(mix_tables(a, b, SwitchingWeight(0.0)).coef, b.coef);
  EXPECT_THROW(mix_tables(a, LossTable{{Vec{1, 1}}}, SwitchingWeight(0.5)), DomainError);
}

TEST(SwitchingGridTest, DefaultGridAndFolds) {
  const Vec grid = default_c_grid();
  ASSERT_EQ(grid.size(), 10u);
  EXPECT_EQ(grid.front(), 0.0);
  EXPECT_EQ(grid.back(), 1.0);
  EXPECT_NEAR(grid[1], 1.0 / 9.0, 1e-15);
  EXPECT_EQ(fold_assignment(7, 3), (std::vector<std::size_t>{0, 1, 2, 0, 1, 2, 0}));
  EXPECT_THROW(fold_assignment(3, 0), DomainError);
}

TEST(SwitchingGridTest, SelectionRespectsGrid) {
  const Dataset data = random_data(60, 6, 0.5);
  const ConstantDemand demand(Vec{0.7, 0.4, 0.2});
  const PolicyTable pi = constant_policy(60, Vec{0.2, 0.5, 0.3});
  const Vec single{0.5};
  EXPECT_EQ(select_c_for_evaluation(data, pi, &demand, {}, single).value(), 0.5);
  EXPECT_THROW(select_c_for_evaluation(data, pi, &demand, {}, Vec{}), DomainError);
  EXPECT_THROW(select_c_for_evaluation(data, pi, &demand, {}, Vec{0.5, 1.5}), DomainError);

  const Vec grid = default_c_grid();
  const double c = select_c_for_evaluation(data, pi, &demand, {}, grid).value();
  // The chosen c has the lowest per-record variance among the grid points.
  auto variance_at = [&](double cc) {
    EstimatorSpec spec{EstimatorKind::kSwitching, cc};
    return estimate_policy_value(data, pi, spec, &demand).variance;
  };
  for (double g : grid) EXPECT_LE(variance_at(c), variance_at(g) + 1e-12);
}

TEST(SwitchingGridTest, CrossFittedSelectionCallsRefitPerFold) {
  const Dataset data = random_data(50, 7, 0.5);
  const ConstantDemand demand(Vec{0.7, 0.4, 0.2});
  const PolicyTable pi = constant_policy(50, Vec{0.2, 0.5, 0.3});
  std::size_t calls = 0;
  const DemandFitter refit = [&calls](const Dataset& train) {
    ++calls;
    EXPECT_EQ(train.size(), 40u);
    return std::unique_ptr<DemandModel>(
        std::make_unique<ConstantDemand>(Vec{0.7, 0.4, 0.2}));
  };
  const Vec grid = default_c_grid();
  const double fitted = select_c_for_evaluation(data, pi, &demand, refit, grid).value();
  EXPECT_EQ(calls, 5u);
  // A refit returning the same model cannot change the choice.
  EXPECT_EQ(fitted, select_c_for_evaluation(data, pi, &demand, {}, grid).value());
}

TEST(EstimatePolicyValueTest, MeanAndVariance) {
  const Dataset data = random_data(100, 8, 0.5);
  const PolicyTable pi = constant_policy(100, Vec{0.1, 0.6, 0.3});
  const PolicyValueEstimate est =
      estimate_policy_value(data, pi, EstimatorSpec{EstimatorKind::kRobust}, nullptr);
  ASSERT_EQ(est.per_record.size(), 100u);
  double mean = 0.0;
  for (double v : est.per_record) mean += v;
  mean /= 100.0;
  double ss = 0.0;
  for (double v : est.per_record) ss += (v - mean) * (v - mean);
  EXPECT_NEAR(est.loss, mean, 1e-12);
  EXPECT_NEAR(est.variance, ss / 99.0, 1e-12);
  EXPECT_FALSE(est.c.has_value());
}

TEST(EstimatePolicyValueTest, SwitchingEndpointsMatchParents) {
  const Dataset data = random_data(40, 9, 0.5);
  const ConstantDemand demand(Vec{0.7, 0.4, 0.2});
  const PolicyTable pi = constant_policy(40, Vec{0.1, 0.6, 0.3});
  const auto at = [&](EstimatorKind kind, std::optional<double> c) {
    return estimate_policy_value(data, pi, EstimatorSpec{kind, c}, &demand).loss;
  };
  EXPECT_NEAR(at(EstimatorKind::kSwitching, 1.0), at(EstimatorKind::kMv, {}), 1e-12);
  EXPECT_NEAR(at(EstimatorKind::kSwitching, 0.0), at(EstimatorKind::kRobust, {}), 1e-12);
  const auto chosen =
      estimate_policy_value(data, pi, EstimatorSpec{EstimatorKind::kSwitching}, &demand);
  ASSERT_TRUE(chosen.c.has_value());
  EXPECT_THROW(estimate_policy_value(data, pi, EstimatorSpec{EstimatorKind::kSwitching}, nullptr),
               DomainError);
  EXPECT_THROW(estimate_policy_value(data, PolicyTable{}, EstimatorSpec{}, nullptr),
               DomainError);
}

// With the true valuation law in hand, Robust and MV are unbiased for the
// policy's mean valuation-level loss.
TEST(EstimatePolicyValueTest, UnbiasedAcrossReplications) {
  const PolicyDist pi(Vec{0.1, 0.6, 0.3});
  const PriceLadder ladder(Vec{1, 2, 3}, 0.5);
  const double truth =
      dot(Vec{0.3, 0.3, 0.2, 0.2}, valuation_loss_vector(pi, ladder).values);
  double robust = 0.0;
  double ips = 0.0;
  constexpr int kReps = 200;
  for (int rep = 0; rep < kReps; ++rep) {
    const Dataset data = random_data(200, 1000 + rep, 0.5);
    const PolicyTable table = constant_policy(200, pi.vec());
    robust += estimate_policy_value(data, table, EstimatorSpec{EstimatorKind::kRobust}, nullptr).loss;
    ips += estimate_policy_value(data, table, EstimatorSpec{EstimatorKind::kIps}, nullptr).loss;
  }
  EXPECT_NEAR(robust / kReps, truth, 0.02);
  EXPECT_NEAR(ips / kReps, truth, 0.02);
}

}  // namespace
}  // namespace pricing
