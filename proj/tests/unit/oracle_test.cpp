#include "pricing/oracle.hpp"

#include <gtest/gtest.h>

#include "pricing/estimators.hpp"
#include "pricing/transfer.hpp"

namespace pricing::oracle {
namespace {

SuiteConfig small_suite() {
  SuiteConfig cfg;
  cfg.instances = 40;
  cfg.policies_per_instance = 10;
  cfg.qp_instances = 5;
  cfg.qp_perturbations = 500;
  return cfg;
}

TEST(ReferenceTransferTest, MatchesConstructor) {
  Rng rng = stream_rng(1, 0);
  for (std::size_t m = 1; m <= 6; ++m) {
    const Propensities pi0(random_simplex(m, rng, 0.1));
    EXPECT_EQ(reference_transfer(pi0), TransferMatrix(pi0).mat());
  }
}

TEST(RandomInstanceTest, FloorMixKeepsEntriesAway) {
  Rng rng = stream_rng(2, 0);
  for (int i = 0; i < 100; ++i) {
    const Vec v = random_simplex(5, rng, 0.5);
    for (double x : v) EXPECT_GE(x, 0.5 / 5 - 1e-15);
  }
  const RandomInstance inst = random_instance(4, rng);
  EXPECT_EQ(inst.ladder.size(), 4u);
  EXPECT_EQ(inst.fv.size(), 5u);
}

TEST(SimplexGridTest, CountsAndSums) {
  // Compositions of 4 into 3 parts.
  const auto grid = simplex_grid(3, 0.25);
  EXPECT_EQ(grid.size(), 15u);
  for (const Vec& p : grid) EXPECT_NEAR(p[0] + p[1] + p[2], 1.0, 1e-12);
}

TEST(SuiteTest, AllChecksPass) {
  const auto rows = run_suite(small_suite());
  EXPECT_EQ(rows.size(), 12u);
  for (const CheckRow& row : rows) {
    EXPECT_TRUE(row.pass) << csv_row(row);
  }
}

TEST(SuiteTest, BrokenRobustIsCaught) {
  SuiteConfig cfg = small_suite();
  cfg.break_robust = true;
  EXPECT_FALSE(check_left_inverse(cfg).pass);
  EXPECT_FALSE(check_unbiasedness(cfg).pass);
  EXPECT_TRUE(check_generalized_inverse(cfg).pass);
}

TEST(SuiteTest, SeedStable) {
  const SuiteConfig cfg = small_suite();
  EXPECT_EQ(check_left_inverse(cfg).max_error, check_left_inverse(cfg).max_error);
  EXPECT_EQ(check_dr_loss(cfg).max_error, check_dr_loss(cfg).max_error);
}

TEST(SuiteTest, CsvFormat) {
  EXPECT_EQ(csv_header(), "check,seed,max_error,pass");
  const CheckRow row{"left_inverse", 7, 1.5e-13, 1e-9, true};
  EXPECT_EQ(csv_row(row), "left_inverse,7,1.500000e-13,true");
}

TEST(MinimaxTest, TwoRungAdversaryAtMidpointOfExtremes) {
  const Propensities pi0(Vec{0.5, 0.5});
  const PriceLadder ladder(Vec{1, 2});
  const ValuationLossVector lv = valuation_loss_vector(PolicyDist(Vec{0.4, 0.6}), ladder);
  const TransferMatrix t(pi0);
  const Mat rob = r_robust(t).mat;
  const std::vector<MinimaxCandidate> cands{{"robust", rob}, {"ips", r_ips(pi0).mat}};
  const double step = default_grid_step(2);
  const MinimaxResult res = minimax_grid(pi0, lv.values, cands, step);
  EXPECT_EQ(res.winner, 0u);
  EXPECT_LE(distance_to_adversary(res.first_argmax), step + 1e-9);

  // MV built at the least favorable point ties Robust there.
  const ValuationDist adversary(Vec{0.5, 0.0, 0.5});
  const OutcomeDist fy = push_forward(t, adversary);
  const Mat mv = r_mv(t, fy).mat;
  EXPECT_NEAR(enumerate_variance(mv, lv.values, fy.probs()),
              enumerate_variance(rob, lv.values, fy.probs()), 1e-9);
  EXPECT_THROW(minimax_grid(Propensities(uniform_probs(5)), Vec(6, 0.0), cands, 0.5),
               DomainError);
}

TEST(QpTest, ClosedFormMatchesNullSpaceSolve) {
  Rng rng = stream_rng(3, 0);
  for (std::size_t m = 2; m <= 5; ++m) {
    const RandomInstance inst = random_instance(m, rng, 0.1);
    const TransferMatrix t(inst.pi0);
    const OutcomeDist fy = push_forward(t, inst.fv);
    EXPECT_LE(max_abs_diff(qp_min_variance(inst.pi0, fy.probs()), r_mv(t, fy).mat), 1e-6);
    const Mat n = null_space_of_transpose(inst.pi0);
    EXPECT_LE(max_abs(matmul(transpose(t.mat()), n)), 1e-10);
  }
}

TEST(DrSweepTest, GapsAtRoundoff) {
  const DrSweep sweep = dr_equivalence_sweep(50, 4);
  EXPECT_LE(sweep.max_loss_gap, 1e-9);
  EXPECT_LE(sweep.max_decomp_gap, 1e-9);
}

}  // namespace
}  // namespace pricing::oracle
