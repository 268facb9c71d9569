// Valuation-space losses and their corrupted-label counterparts.
//
// Losses are negative revenue. For a policy pi the valuation loss of a
// customer in slot s is l_V[s] = -sum_{j < s} pi(j) (p_j - C); slot 0 is 0.
// Any R with R T = I turns it into a loss on observed outcomes, R' l_V, with
// the same expectation.

#ifndef PRICING_LOSSES_HPP_
#define PRICING_LOSSES_HPP_

#include "pricing/densemat.hpp"
#include "pricing/ladder.hpp"

namespace pricing {

// m+1 entries, indexed by valuation slot.
struct ValuationLossVector {
  Vec values;
};

// 2m entries, indexed by outcome.
struct CorruptedLossVector {
  Vec values;
};

ValuationLossVector valuation_loss_vector(const PolicyDist& pi,
                                          const PriceLadder& ladder);

// R' l_V. R must be (m+1) x 2m.
CorruptedLossVector corrupted_loss_vector(const Mat& r,
                                          const ValuationLossVector& lv);

// l_V' R (diag(f) - f f') R' l_V, the variance of the corrupted loss given x.
// Computed as a second moment minus a squared mean and clamped at 0.
double conditional_variance(const Mat& r, const ValuationLossVector& lv,
                            const OutcomeDist& fy);

// Same quantity for a precomputed R' l_V.
double conditional_variance(const CorruptedLossVector& c, const OutcomeDist& fy);

// Coefficients a with corrupted loss(pi) = a . pi for a record whose outcome
// is `outcome`. The corrupted loss is linear in pi, so evaluating many
// policies (or differentiating through a softmax) only needs this vector:
// a_j = -(p_j - C) * sum_{s > j} R(s, outcome).
Vec loss_coefficients(const Mat& r, std::size_t outcome, const PriceLadder& ladder);

}  // namespace pricing

#endif  // PRICING_LOSSES_HPP_
