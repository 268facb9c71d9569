// Brute-force checks for the estimator closed forms. Nothing here calls the
// constructors it verifies: T, expectations and variances are rebuilt from
// the propensities with explicit loops.

#ifndef PRICING_ORACLE_HPP_
#define PRICING_ORACLE_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "pricing/densemat.hpp"
#include "pricing/ladder.hpp"
#include "pricing/losses.hpp"
#include "pricing/synthgen.hpp"

namespace pricing::oracle {

// T rebuilt from its definition: row j (sale at rung j) is pi_0(j) on slots
// s > j, row m + j (no sale) is pi_0(j) on slots s <= j.
Mat reference_transfer(const Propensities& pi0);

// sum_k (T f_V)_k (R' l_V)_k.
double exact_expectation(const Mat& r, const ValuationLossVector& lv,
                         const ValuationDist& fv, const Propensities& pi0);

// Var over outcomes of R' l_V under f.
double enumerate_variance(const Mat& r, std::span<const double> lv, std::span<const double> f);

// Basis of the null space of T' (2m x (m-1)).
Mat null_space_of_transpose(const Propensities& pi0);

// Minimizes trace(R Sigma R') over {R : R T = I}, Sigma = diag(f) - f f',
// through R = R0 + Z N'. Throws MatError on rank deficiency.
Mat qp_min_variance(const Propensities& pi0, std::span<const double> fy);

// All points of the (m+1)-slot simplex with coordinates on multiples of
// `step`.
std::vector<Vec> simplex_grid(std::size_t slots, double step);

struct MinimaxCandidate {
  std::string name;
  Mat r;
};

struct MinimaxResult {
  std::vector<double> worst_variance;  // per candidate
  std::size_t winner = 0;              // candidate with the smallest worst case
  // Grid maximizers of the first candidate's variance (ties at 1e-9 relative).
  std::vector<Vec> first_argmax;
};

inline constexpr std::size_t kMaxMinimaxLadder = 4;

double default_grid_step(std::size_t m);

// Throws DomainError for m > kMaxMinimaxLadder.
MinimaxResult minimax_grid(const Propensities& pi0, std::span<const double> lv,
                           const std::vector<MinimaxCandidate>& candidates, double step);

// Grid distance (infinity norm) from 1/2 (e_first + e_last) to the nearest
// point of `points`.
double distance_to_adversary(const std::vector<Vec>& points);

struct RandomInstance {
  std::size_t m;
  Propensities pi0;
  ValuationDist fv;
  PolicyDist pi;
  PriceLadder ladder;
};

// Dirichlet(1) draws mixed with `floor_mix` of the uniform so no entry is
// vanishingly small. Prices are sorted U(0.5, 5) draws with cost 0.
RandomInstance random_instance(std::size_t m, Rng& rng, double floor_mix = 0.0);
Vec random_simplex(std::size_t n, Rng& rng, double floor_mix = 0.0);

struct DrSweep {
  double max_loss_gap = 0.0;    // |Y' R_MV' l_V + l_DR| over outcomes
  double max_decomp_gap = 0.0;  // |R_MV - (R_DM + R_IPS - R_DIPS)|
};

DrSweep dr_equivalence_sweep(std::size_t instances, std::uint64_t seed,
                             std::size_t m_lo = 2, std::size_t m_hi = 6);

struct CheckRow {
  std::string check;
  std::uint64_t seed = 0;
  double max_error = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

struct SuiteConfig {
  std::uint64_t seed = 20240101;
  std::size_t instances = 200;
  std::size_t policies_per_instance = 50;
  std::size_t qp_instances = 20;
  std::size_t qp_perturbations = 10000;
  // Test hook: perturb entry (1, 0) of every robust matrix by 0.1.
  bool break_robust = false;
};

CheckRow check_left_inverse(const SuiteConfig& cfg);
CheckRow check_generalized_inverse(const SuiteConfig& cfg);
CheckRow check_unbiasedness(const SuiteConfig& cfg);
CheckRow check_dr_loss(const SuiteConfig& cfg);
CheckRow check_dr_decomposition(const SuiteConfig& cfg);
CheckRow check_qp_match(const SuiteConfig& cfg);
// max_error counts random feasible R that beat the closed form.
CheckRow check_qp_perturbations(const SuiteConfig& cfg);
// max_error is robust's worst case minus the best other worst case (<= slack
// passes); a second row checks the adversary location.
std::vector<CheckRow> check_minimax(const SuiteConfig& cfg, std::size_t m);
CheckRow check_policy_gradient(const SuiteConfig& cfg);

std::vector<CheckRow> run_suite(const SuiteConfig& cfg);

std::string csv_header();
std::string csv_row(const CheckRow& row);

}  // namespace pricing::oracle

#endif  // PRICING_ORACLE_HPP_
