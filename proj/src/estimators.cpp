#include "pricing/estimators.hpp"

#include <algorithm>
#include <cmath>

namespace pricing {

std::string_view to_string(EstimatorKind kind) {
  switch (kind) {
    case EstimatorKind::kMv: return "MV";
    case EstimatorKind::kRobust: return "Robust";
    case EstimatorKind::kIps: return "IPS";
    case EstimatorKind::kCips: return "CIPS";
    case EstimatorKind::kDr: return "DR";
    case EstimatorKind::kSwitching: return "CMix";
  }
  return "?";
}

EstimatorKind parse_estimator_kind(std::string_view name) {
  std::string s(name);
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char ch) { return std::tolower(ch); });
  if (s == "mv") return EstimatorKind::kMv;
  if (s == "robust") return EstimatorKind::kRobust;
  if (s == "ips") return EstimatorKind::kIps;
  if (s == "cips") return EstimatorKind::kCips;
  if (s == "dr") return EstimatorKind::kDr;
  if (s == "cmix" || s == "switching") return EstimatorKind::kSwitching;
  throw DomainError("unknown estimator '" + std::string(name) + "'");
}

bool needs_demand(EstimatorKind kind) {
  return kind == EstimatorKind::kMv || kind == EstimatorKind::kDr ||
         kind == EstimatorKind::kSwitching;
}

SwitchingWeight::SwitchingWeight(double c) : c_(c) {
  if (!(c >= 0.0 && c <= 1.0)) {
    throw DomainError("switching weight must lie in [0, 1], got " +
                      std::to_string(c));
  }
}

Mat weighted_left_inverse(const TransferMatrix& t,
                          std::span<const double> weights) {
  const Mat& tm = t.mat();
  if (weights.size() != tm.rows()) {
    throw MatError("weighted_left_inverse: weight length mismatch");
  }
  // Least squares on A = W^(1/2) T with right-hand side W^(1/2):
  // (A'A)^-1 A' W^(1/2) = (T'WT)^-1 T'W, without squaring cond(A).
  Mat a(tm.rows(), tm.cols());
  Mat rhs(tm.rows(), tm.rows());
  for (std::size_t k = 0; k < tm.rows(); ++k) {
    if (!(weights[k] > 0.0)) {
      throw DomainError("outcome weight " + std::to_string(k) + " is not positive");
    }
    const double root = 1.0 / std::sqrt(weights[k]);
    for (std::size_t s = 0; s < tm.cols(); ++s) a(k, s) = tm(k, s) * root;
    rhs(k, k) = root;
  }
  return QrFactor(a).solve_least_squares(rhs);
}

ReweightMatrix r_mv(const TransferMatrix& t, const OutcomeDist& fy_hat) {
  Vec f = fy_hat.vec();
  if (f.size() != 2 * t.ladder_size()) {
    throw MatError("r_mv: outcome distribution length mismatch");
  }
  bool clipped = false;
  for (double& v : f) {
    if (v < kOutcomeFloor) {
      v = kOutcomeFloor;
      clipped = true;
    }
  }
  if (clipped) {
    double sum = 0.0;
    for (double v : f) sum += v;
    for (double& v : f) v /= sum;
  }
  return {weighted_left_inverse(t, f), EstimatorKind::kMv};
}

ReweightMatrix r_robust(const TransferMatrix& t) {
  const Propensities& pi0 = t.propensities();
  Vec w(2 * pi0.size());
  for (std::size_t j = 0; j < pi0.size(); ++j) {
    w[j] = pi0[j];
    w[pi0.size() + j] = pi0[j];
  }
  return {weighted_left_inverse(t, w), EstimatorKind::kRobust};
}

Mat r_robust_blocks(const Propensities& pi0) {
  if (!pi0.has_overlap()) throw DomainError("overlap violated");
  const std::size_t m = pi0.size();
  const Mat u = upper_purchase_block(m);
  const Mat l = lower_purchase_block(m);
  const Mat p = diag_from(pi0.probs());
  const Mat ut = transpose(u);
  const Mat lt = transpose(l);
  const Mat gram = add(matmul(matmul(ut, p), u), matmul(matmul(lt, p), l));
  Mat rhs(m + 1, 2 * m);
  for (std::size_t s = 0; s <= m; ++s) {
    for (std::size_t j = 0; j < m; ++j) {
      rhs(s, j) = ut(s, j);
      rhs(s, m + j) = lt(s, j);
    }
  }
  return solve(gram, rhs);
}

ReweightMatrix r_ips(const Propensities& pi0) {
  if (!pi0.has_overlap()) throw DomainError("overlap violated");
  const std::size_t m = pi0.size();
  Mat r(m + 1, 2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    r(j, j) = -1.0 / pi0[j];
    r(j + 1, j) = 1.0 / pi0[j];
  }
  return {std::move(r), EstimatorKind::kIps};
}

ReweightMatrix r_cips(const Propensities& pi0) {
  if (!pi0.has_overlap()) throw DomainError("overlap violated");
  const std::size_t m = pi0.size();
  Mat r(m + 1, 2 * m);
  for (std::size_t k = 0; k < 2 * m; ++k) r(m, k) = 1.0;
  for (std::size_t j = 0; j < m; ++j) {
    r(j, m + j) += 1.0 / pi0[j];
    r(j + 1, m + j) -= 1.0 / pi0[j];
  }
  return {std::move(r), EstimatorKind::kCips};
}

ReweightMatrix r_switching(const ReweightMatrix& mv, const ReweightMatrix& rob,
                           SwitchingWeight c) {
  if (c.value() == 1.0) return {mv.mat, EstimatorKind::kSwitching};
  if (c.value() == 0.0) return {rob.mat, EstimatorKind::kSwitching};
  return {add(scale(mv.mat, c.value()), scale(rob.mat, 1.0 - c.value())),
          EstimatorKind::kSwitching};
}

Mat difference_matrix(std::size_t m) {
  Mat h(m + 1, m);
  for (std::size_t j = 0; j < m; ++j) {
    h(j, j) = -1.0;
    h(j + 1, j) = 1.0;
  }
  return h;
}

DrDecomposition dr_decomposition(const TransferMatrix& t,
                                 const ValuationDist& fv_hat) {
  const std::size_t m = t.ladder_size();
  const Propensities& pi0 = t.propensities();
  const OutcomeDist fy = push_forward(t, fv_hat);
  for (std::size_t k = 0; k < fy.size(); ++k) {
    if (fy[k] <= kOutcomeFloor) {
      throw DomainError("degenerate plug-in outcome distribution at outcome " +
                        std::to_string(k));
    }
  }
  DrDecomposition out{Mat(m + 1, 2 * m), r_ips(pi0).mat, Mat(m + 1, 2 * m)};
  for (std::size_t s = 0; s <= m; ++s) {
    for (std::size_t k = 0; k < 2 * m; ++k) out.dm(s, k) = fv_hat[s];
  }
  const Mat h = difference_matrix(m);
  for (std::size_t j = 0; j < m; ++j) {
    const double w = fy[j] / (pi0[j] * pi0[j]);
    for (std::size_t s = 0; s <= m; ++s) {
      out.dips(s, j) = h(s, j) * w;
      out.dips(s, m + j) = h(s, j) * w;
    }
  }
  return out;
}

double dr_loss(std::size_t price, bool sold, const PolicyDist& pi,
               std::span<const double> mu_hat, const Propensities& pi0,
               const PriceLadder& ladder) {
  const std::size_t m = ladder.size();
  if (pi.size() != m || mu_hat.size() != m || pi0.size() != m || price >= m) {
    throw DomainError("dr_loss: shape mismatch");
  }
  double direct = 0.0;
  for (std::size_t k = 0; k < m; ++k) direct += mu_hat[k] * pi[k];
  const double observed = sold ? ladder.margin(price) : 0.0;
  return direct + (observed - mu_hat[price]) / pi0[price] * pi[price];
}

}  // namespace pricing
