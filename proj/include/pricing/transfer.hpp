// The transfer matrix T (2m x (m+1)) mapping a valuation distribution to the
// distribution of observed (price, sold) outcomes: f_Y~ = T f_V.
//
// Row j < m is "offered rung j and bought": the customer bought iff their
// valuation slot exceeds j, with probability pi_0(j). Row m + j is "offered
// rung j and did not buy": valuation slot <= j. Each column is the outcome
// distribution of one valuation and sums to 1.

#ifndef PRICING_TRANSFER_HPP_
#define PRICING_TRANSFER_HPP_

#include "pricing/densemat.hpp"
#include "pricing/ladder.hpp"

namespace pricing {

class TransferMatrix {
 public:
  // Throws DomainError("overlap violated") if any propensity is zero.
  explicit TransferMatrix(const Propensities& pi0);

  const Mat& mat() const { return mat_; }
  std::size_t ladder_size() const { return m_; }
  const Propensities& propensities() const { return pi0_; }

 private:
  Propensities pi0_;
  std::size_t m_;
  Mat mat_;
};

inline TransferMatrix build_transfer(const Propensities& pi0) {
  return TransferMatrix(pi0);
}

// T f_V as an outcome distribution.
OutcomeDist push_forward(const TransferMatrix& t, const ValuationDist& fv);

// 0/1 blocks with T = diag(pi_0, pi_0) [U; L]: U(j, s) = [s > j],
// L(j, s) = [s <= j]. Both m x (m+1).
Mat upper_purchase_block(std::size_t m);
Mat lower_purchase_block(std::size_t m);

}  // namespace pricing

#endif  // PRICING_TRANSFER_HPP_
