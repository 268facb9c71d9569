#include "pricing/transfer.hpp"

#include <algorithm>

namespace pricing {

TransferMatrix::TransferMatrix(const Propensities& pi0)
    : pi0_(pi0), m_(pi0.size()), mat_(2 * pi0.size(), pi0.size() + 1) {
  if (!pi0.has_overlap()) throw DomainError("overlap violated");
  for (std::size_t j = 0; j < m_; ++j) {
    for (std::size_t s = 0; s <= m_; ++s) {
      if (s > j) {
        mat_(j, s) = pi0[j];
      } else {
        mat_(m_ + j, s) = pi0[j];
      }
    }
  }
}

OutcomeDist push_forward(const TransferMatrix& t, const ValuationDist& fv) {
  if (fv.size() != t.ladder_size() + 1) {
    throw MatError("push_forward: valuation distribution has " +
                   std::to_string(fv.size()) + " slots, expected " +
                   std::to_string(t.ladder_size() + 1));
  }
  Vec fy = matvec(t.mat(), fv.probs());
  // Sums are exact up to rounding; clip the -0.0/-eps that rounding can leave.
  for (double& v : fy) v = std::max(v, 0.0);
  return OutcomeDist(std::move(fy));
}

Mat upper_purchase_block(std::size_t m) {
  Mat u(m, m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t s = j + 1; s <= m; ++s) u(j, s) = 1.0;
  }
  return u;
}

Mat lower_purchase_block(std::size_t m) {
  Mat l(m, m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t s = 0; s <= j; ++s) l(j, s) = 1.0;
  }
  return l;
}

}  // namespace pricing
