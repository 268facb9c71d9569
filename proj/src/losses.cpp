#include "pricing/losses.hpp"

#include <algorithm>

namespace pricing {

ValuationLossVector valuation_loss_vector(const PolicyDist& pi,
                                          const PriceLadder& ladder) {
  const std::size_t m = ladder.size();
  if (pi.size() != m) {
    throw DomainError("policy has " + std::to_string(pi.size()) +
                      " entries for a ladder of " + std::to_string(m));
  }
  ValuationLossVector lv{Vec(m + 1, 0.0)};
  double acc = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    acc -= pi[j] * ladder.margin(j);
    lv.values[j + 1] = acc;
  }
  return lv;
}

CorruptedLossVector corrupted_loss_vector(const Mat& r,
                                          const ValuationLossVector& lv) {
  if (r.rows() != lv.values.size() || r.cols() != 2 * (r.rows() - 1)) {
    throw MatError("corrupted_loss_vector: R is " + std::to_string(r.rows()) +
                   "x" + std::to_string(r.cols()) + ", loss vector has " +
                   std::to_string(lv.values.size()) + " entries");
  }
  return {matvec_transposed(r, lv.values)};
}

double conditional_variance(const CorruptedLossVector& c, const OutcomeDist& fy) {
  if (c.values.size() != fy.size()) {
    throw MatError("conditional_variance: outcome length mismatch");
  }
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < fy.size(); ++k) {
    mean += fy[k] * c.values[k];
    second += fy[k] * c.values[k] * c.values[k];
  }
  return std::max(second - mean * mean, 0.0);
}

double conditional_variance(const Mat& r, const ValuationLossVector& lv,
                            const OutcomeDist& fy) {
  return conditional_variance(corrupted_loss_vector(r, lv), fy);
}

Vec loss_coefficients(const Mat& r, std::size_t outcome,
                      const PriceLadder& ladder) {
  const std::size_t m = ladder.size();
  if (r.rows() != m + 1 || r.cols() != 2 * m || outcome >= 2 * m) {
    throw MatError("loss_coefficients: shape mismatch");
  }
  Vec a(m);
  double suffix = 0.0;
  for (std::size_t j = m; j-- > 0;) {
    suffix += r(j + 1, outcome);
    a[j] = -ladder.margin(j) * suffix;
  }
  return a;
}

}  // namespace pricing
