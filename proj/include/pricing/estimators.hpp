// Reweighting matrices R, one per estimator family.
//
// MV, Robust and Switching are left inverses of T (R T = I). IPS and CIPS are
// built directly from the propensities; they satisfy T'R'l_V = l_V for every
// valuation loss vector (l_V[0] = 0), which is all unbiasedness needs.

#ifndef PRICING_ESTIMATORS_HPP_
#define PRICING_ESTIMATORS_HPP_

#include <string>
#include <string_view>

#include "pricing/densemat.hpp"
#include "pricing/ladder.hpp"
#include "pricing/transfer.hpp"

namespace pricing {

enum class EstimatorKind { kMv, kRobust, kIps, kCips, kDr, kSwitching };

std::string_view to_string(EstimatorKind kind);
// Accepts "mv", "robust", "ips", "cips", "dr", "cmix"/"switching".
EstimatorKind parse_estimator_kind(std::string_view name);
// Whether the estimator needs a demand model (plug-in f_Y~ or mu).
bool needs_demand(EstimatorKind kind);

struct ReweightMatrix {
  Mat mat;  // (m+1) x 2m
  EstimatorKind kind;
};

class SwitchingWeight {
 public:
  explicit SwitchingWeight(double c);
  double value() const { return c_; }

 private:
  double c_;
};

// Plug-in outcome probabilities below this are raised to it (then the
// vector is renormalized) before diag(f)^-1 is formed.
inline constexpr double kOutcomeFloor = 1e-4;

// (T' W T)^-1 T' W with W = diag(weights)^-1, by Householder least squares.
Mat weighted_left_inverse(const TransferMatrix& t, std::span<const double> weights);

// Minimum-variance left inverse for the plug-in outcome distribution.
ReweightMatrix r_mv(const TransferMatrix& t, const OutcomeDist& fy_hat);

// Minimax left inverse: the MV solution at the adversarial valuation
// distribution 1/2 (e_first + e_last), i.e. weights diag(pi_0, pi_0).
ReweightMatrix r_robust(const TransferMatrix& t);

// Same matrix through the block form (U' P U + L' P L)^-1 [U' L'],
// P = diag(pi_0). Kept as an independent route for cross-checking.
Mat r_robust_blocks(const Propensities& pi0);

ReweightMatrix r_ips(const Propensities& pi0);

// Complement of IPS: weights the no-sale outcomes. The corrupted loss is
// l_V[m] (the policy's full-margin loss) plus (1-Y)(p_j-C)pi(j)/pi_0(j).
ReweightMatrix r_cips(const Propensities& pi0);

// c R_mv + (1-c) R_rob.
ReweightMatrix r_switching(const ReweightMatrix& mv, const ReweightMatrix& rob,
                           SwitchingWeight c);

// R_mv = R_dm + R_ips - R_dips for a plug-in valuation distribution.
struct DrDecomposition {
  Mat dm;    // f_V e'
  Mat ips;   // [H diag(1/pi_0), 0]
  Mat dips;  // [H diag(f_Y1/pi_0^2), H diag(f_Y1/pi_0^2)]
};

// Throws DomainError if T f_V has an entry at or below kOutcomeFloor (the
// identity only holds for the unfloored MV matrix).
DrDecomposition dr_decomposition(const TransferMatrix& t,
                                 const ValuationDist& fv_hat);

// Bidiagonal (m+1) x m difference matrix: H(j, j) = -1, H(j+1, j) = 1.
Mat difference_matrix(std::size_t m);

// Doubly robust reward for one logged outcome:
//   sum_k mu_k pi(k) + ((p_j - C) Y - mu_j) / pi_0(j) * pi(j).
// Equals minus the MV corrupted loss when mu comes from the same f_V.
double dr_loss(std::size_t price, bool sold, const PolicyDist& pi,
               std::span<const double> mu_hat, const Propensities& pi0,
               const PriceLadder& ladder);

}  // namespace pricing

#endif  // PRICING_ESTIMATORS_HPP_
