#include "pricing/ladder.hpp"

#include <set>

#include <gtest/gtest.h>

namespace pricing {
namespace {

TEST(PriceLadderTest, RejectsBadPrices) {
  EXPECT_THROW(PriceLadder(Vec{}), DomainError);
  EXPECT_THROW(PriceLadder(Vec{1, 1}), DomainError);
  EXPECT_THROW(PriceLadder(Vec{2, 1}), DomainError);
  EXPECT_THROW(PriceLadder(Vec{0, 1}), DomainError);
  EXPECT_THROW(PriceLadder(Vec{1, 2}, -1.0), DomainError);
}

TEST(PriceLadderTest, MarginWarningsNameRungsAtOrBelowCost) {
  const PriceLadder ladder(Vec{1, 2, 3}, 2.0);
  EXPECT_EQ(ladder.margin_warnings().size(), 2u);
  EXPECT_DOUBLE_EQ(ladder.margin(2), 1.0);
  EXPECT_TRUE(PriceLadder(Vec{1, 2}).margin_warnings().empty());
}

TEST(DistributionTest, SimplexEnforced) {
  EXPECT_NO_THROW(Propensities(Vec{0.25, 0.75}));
  EXPECT_NO_THROW(ValuationDist(Vec{1.0 - 5e-10, 0.0}));
  EXPECT_THROW(Propensities(Vec{0.5, 0.6}), DomainError);
  EXPECT_THROW(ValuationDist(Vec{1.0 - 2e-9, 0.0}), DomainError);
  EXPECT_THROW(OutcomeDist(Vec{1.5, -0.5}), DomainError);
  EXPECT_THROW(PolicyDist(Vec{}), DomainError);
}

TEST(DistributionTest, ZeroPropensityConstructsButLacksOverlap) {
  const Propensities pi0(Vec{0.0, 1.0});
  EXPECT_FALSE(pi0.has_overlap());
  EXPECT_DOUBLE_EQ(pi0.min(), 0.0);
  EXPECT_TRUE(Propensities(uniform_probs(4)).has_overlap());
}

TEST(OutcomeIndexTest, Examples) {
  EXPECT_EQ(outcome_index(0, true, 5), 0u);
  EXPECT_EQ(outcome_index(4, false, 5), 9u);
  EXPECT_EQ(outcome_index(1, true, 2), 1u);
  EXPECT_THROW(outcome_index(2, true, 2), DomainError);
}

TEST(OutcomeIndexTest, Bijection) {
  for (std::size_t m = 1; m <= 8; ++m) {
    std::set<std::size_t> seen;
    for (std::size_t j = 0; j < m; ++j) {
      for (bool sold : {true, false}) seen.insert(outcome_index(j, sold, m));
    }
    EXPECT_EQ(seen.size(), 2 * m);
    EXPECT_EQ(*seen.rbegin(), 2 * m - 1);
  }
}

Dataset three_records() {
  Dataset data{PriceLadder(Vec{1, 2, 3}), {}, {}};
  for (std::size_t j = 0; j < 3; ++j) {
    data.records.push_back({Vec{0.0}, j, j < 2, std::size_t{2}});
    data.logging.emplace_back(uniform_probs(3));
  }
  return data;
}

TEST(ValidateTest, UniformPropensitiesGiveNoFlags) {
  const ValidationReport report = validate(three_records());
  EXPECT_TRUE(report.ok());
  EXPECT_DOUBLE_EQ(report.min_logged_propensity, 1.0 / 3.0);
  EXPECT_EQ(report.assumed.size(), 2u);
}

TEST(ValidateTest, ZeroPropensityAtOfferedPriceFlagged) {
  Dataset data = three_records();
  data.logging[1] = Propensities(Vec{0.5, 0.0, 0.5});
  const ValidationReport report = validate(data);
  ASSERT_EQ(report.flags.size(), 1u);
  EXPECT_EQ(report.flags[0].record, 1u);
  EXPECT_EQ(report.flags[0].kind, FlagKind::kOverlap);
}

TEST(ValidateTest, SaleAboveValuationFlagged) {
  Dataset data = three_records();
  data.records[2].sold = true;  // offered rung 2, valuation slot 2
  const ValidationReport report = validate(data);
  ASSERT_EQ(report.flags.size(), 1u);
  EXPECT_EQ(report.flags[0].kind, FlagKind::kConsistency);
}

TEST(DatasetTest, SubsetKeepsPropensitiesAligned) {
  Dataset data = three_records();
  data.logging[2] = Propensities(Vec{0.2, 0.3, 0.5});
  const std::vector<std::size_t> idx{2, 0};
  const Dataset sub = data.subset(idx);
  ASSERT_EQ(sub.size(), 2u);
  EXPECT_EQ(sub.records[0].price, 2u);
  EXPECT_DOUBLE_EQ(sub.logging[0][2], 0.5);
  EXPECT_TRUE(sub.has_valuations());
}

}  // namespace
}  // namespace pricing
