#include "pricing/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "pricing/estimators.hpp"
#include "pricing/policy.hpp"
#include "pricing/transfer.hpp"

namespace pricing::oracle {
namespace {

Vec valuation_loss(const PolicyDist& pi, const PriceLadder& ladder) {
  // Slot s loses the margin of every rung below it, weighted by pi.
  const std::size_t m = ladder.size();
  Vec lv(m + 1, 0.0);
  for (std::size_t s = 1; s <= m; ++s) {
    for (std::size_t j = 0; j < s; ++j) lv[s] -= pi[j] * ladder.margin(j);
  }
  return lv;
}

Vec corrupted(const Mat& r, std::span<const double> lv) {
  Vec c(r.cols(), 0.0);
  for (std::size_t k = 0; k < r.cols(); ++k) {
    for (std::size_t s = 0; s < r.rows(); ++s) c[k] += r(s, k) * lv[s];
  }
  return c;
}

Vec push(const Propensities& pi0, std::span<const double> fv) {
  const std::size_t m = pi0.size();
  Vec f(2 * m, 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t s = 0; s <= m; ++s) {
      (s > j ? f[j] : f[m + j]) += pi0[j] * fv[s];
    }
  }
  return f;
}

double variance_of(std::span<const double> c, std::span<const double> f) {
  double mean = 0.0;
  double second = 0.0;
  for (std::size_t k = 0; k < c.size(); ++k) {
    mean += f[k] * c[k];
    second += f[k] * c[k] * c[k];
  }
  return second - mean * mean;
}

double left_inverse_error(const Mat& r, const Propensities& pi0) {
  return max_abs_diff(matmul(r, reference_transfer(pi0)), Mat::identity(pi0.size() + 1));
}

}  // namespace

Mat reference_transfer(const Propensities& pi0) {
  const std::size_t m = pi0.size();
  Mat t(2 * m, m + 1);
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t s = 0; s <= m; ++s) {
      if (s > j) {
        t(j, s) = pi0[j];
      } else {
        t(m + j, s) = pi0[j];
      }
    }
  }
  return t;
}

double exact_expectation(const Mat& r, const ValuationLossVector& lv,
                         const ValuationDist& fv, const Propensities& pi0) {
  const Vec f = push(pi0, fv.probs());
  const Vec c = corrupted(r, lv.values);
  double total = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) total += f[k] * c[k];
  return total;
}

double enumerate_variance(const Mat& r, std::span<const double> lv,
                          std::span<const double> f) {
  return variance_of(corrupted(r, lv), f);
}

namespace {

// Sale rows 0..m-1 plus the no-sale row of rung 0 form an invertible
// square block of T; the remaining m-1 no-sale rows are free.
std::vector<std::size_t> pivot_rows(std::size_t m) {
  std::vector<std::size_t> rows(m + 1);
  for (std::size_t j = 0; j < m; ++j) rows[j] = j;
  rows[m] = m;
  return rows;
}

}  // namespace

Mat null_space_of_transpose(const Propensities& pi0) {
  const std::size_t m = pi0.size();
  const Mat t = reference_transfer(pi0);
  const auto piv = pivot_rows(m);
  Mat block(m + 1, m + 1);
  for (std::size_t a = 0; a < piv.size(); ++a) {
    for (std::size_t s = 0; s <= m; ++s) block(a, s) = t(piv[a], s);
  }
  const Mat block_t = transpose(block);
  Mat n(2 * m, m - 1);
  for (std::size_t q = 0; q + 1 < m; ++q) {
    const std::size_t free_row = m + 1 + q;
    // T' v = 0 with v_free = 1: block' v_piv = -T(free_row, :)'.
    Vec rhs(m + 1);
    for (std::size_t s = 0; s <= m; ++s) rhs[s] = -t(free_row, s);
    const Vec v = solve(block_t, rhs);
    for (std::size_t a = 0; a < piv.size(); ++a) n(piv[a], q) = v[a];
    n(free_row, q) = 1.0;
  }
  return n;
}

Mat qp_min_variance(const Propensities& pi0, std::span<const double> fy) {
  const std::size_t m = pi0.size();
  if (fy.size() != 2 * m) throw MatError("qp_min_variance: outcome length mismatch");
  for (double v : fy) {
    if (!(v > 0.0)) throw DomainError("qp_min_variance needs strictly positive f");
  }
  const Mat t = reference_transfer(pi0);
  const auto piv = pivot_rows(m);
  Mat block(m + 1, m + 1);
  for (std::size_t a = 0; a < piv.size(); ++a) {
    for (std::size_t s = 0; s <= m; ++s) block(a, s) = t(piv[a], s);
  }
  const Mat block_inv = inverse(block);
  Mat r0(m + 1, 2 * m);
  for (std::size_t a = 0; a < piv.size(); ++a) {
    for (std::size_t s = 0; s <= m; ++s) r0(s, piv[a]) = block_inv(s, a);
  }
  if (m == 1) return r0;  // T is square up to the null space, which is empty

  const Mat n = null_space_of_transpose(pi0);
  Mat sigma = diag_from(fy);
  sigma = subtract(sigma, outer(fy, fy));
  const Mat nt = transpose(n);
  const Mat gram = matmul(matmul(nt, sigma), n);
  // Stationarity: (N' S N) Z' = -N' S R0'.
  const Mat rhs = scale(matmul(matmul(nt, sigma), transpose(r0)), -1.0);
  const Mat z = transpose(solve(gram, rhs));
  return add(r0, matmul(z, nt));
}

std::vector<Vec> simplex_grid(std::size_t slots, double step) {
  const auto units = static_cast<std::size_t>(std::llround(1.0 / step));
  if (units == 0 || std::abs(units * step - 1.0) > 1e-9) {
    throw DomainError("grid step must divide 1");
  }
  std::vector<Vec> out;
  std::vector<std::size_t> counts(slots, 0);
  // Enumerate compositions of `units` into `slots` parts.
  auto rec = [&](auto& self, std::size_t idx, std::size_t left) -> void {
    if (idx + 1 == slots) {
      counts[idx] = left;
      Vec p(slots);
      for (std::size_t i = 0; i < slots; ++i) {
        p[i] = static_cast<double>(counts[i]) / static_cast<double>(units);
      }
      out.push_back(std::move(p));
      return;
    }
    for (std::size_t c = 0; c <= left; ++c) {
      counts[idx] = c;
      self(self, idx + 1, left - c);
    }
  };
  rec(rec, 0, units);
  return out;
}

double default_grid_step(std::size_t m) {
  if (m <= 2) return 0.01;
  if (m == 3) return 0.05;
  return 0.1;
}

MinimaxResult minimax_grid(const Propensities& pi0, std::span<const double> lv,
                           const std::vector<MinimaxCandidate>& candidates, double step) {
  const std::size_t m = pi0.size();
  if (m > kMaxMinimaxLadder) {
    throw DomainError("minimax grid is limited to ladders of " +
                      std::to_string(kMaxMinimaxLadder) + " prices");
  }
  if (candidates.empty()) throw DomainError("minimax_grid: no candidates");
  const std::vector<Vec> grid = simplex_grid(m + 1, step);
  std::vector<Vec> outcome(grid.size());
  for (std::size_t g = 0; g < grid.size(); ++g) outcome[g] = push(pi0, grid[g]);

  MinimaxResult res;
  res.worst_variance.assign(candidates.size(), -std::numeric_limits<double>::infinity());
  Vec first_var(grid.size());
  for (std::size_t c = 0; c < candidates.size(); ++c) {
    const Vec loss = corrupted(candidates[c].r, lv);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const double v = variance_of(loss, outcome[g]);
      if (c == 0) first_var[g] = v;
      res.worst_variance[c] = std::max(res.worst_variance[c], v);
    }
  }
  res.winner = static_cast<std::size_t>(
      std::min_element(res.worst_variance.begin(), res.worst_variance.end()) -
      res.worst_variance.begin());
  const double top = res.worst_variance[0];
  const double tie = 1e-9 * std::max(std::abs(top), 1.0);
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (first_var[g] >= top - tie) res.first_argmax.push_back(grid[g]);
  }
  return res;
}

double distance_to_adversary(const std::vector<Vec>& points) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& p : points) {
    Vec target(p.size(), 0.0);
    target.front() = 0.5;
    target.back() = 0.5;
    best = std::min(best, max_abs_diff(p, target));
  }
  return best;
}

Vec random_simplex(std::size_t n, Rng& rng, double floor_mix) {
  std::exponential_distribution<double> expo(1.0);
  Vec p(n);
  double total = 0.0;
  for (double& v : p) {
    v = expo(rng);
    total += v;
  }
  for (double& v : p) v = (1.0 - floor_mix) * v / total + floor_mix / static_cast<double>(n);
  return p;
}

RandomInstance random_instance(std::size_t m, Rng& rng, double floor_mix) {
  std::uniform_real_distribution<double> unif(0.5, 5.0);
  Vec prices(m);
  for (double& p : prices) p = unif(rng);
  std::sort(prices.begin(), prices.end());
  for (std::size_t j = 1; j < m; ++j) {
    if (prices[j] <= prices[j - 1]) prices[j] = prices[j - 1] + 1e-3;
  }
  return RandomInstance{m, Propensities(random_simplex(m, rng, floor_mix)),
                        ValuationDist(random_simplex(m + 1, rng, floor_mix)),
                        PolicyDist(random_simplex(m, rng)), PriceLadder(std::move(prices))};
}

DrSweep dr_equivalence_sweep(std::size_t instances, std::uint64_t seed, std::size_t m_lo,
                             std::size_t m_hi) {
  DrSweep out;
  Rng rng = stream_rng(seed, 3);
  for (std::size_t i = 0; i < instances; ++i) {
    const std::size_t m = m_lo + i % (m_hi - m_lo + 1);
    const RandomInstance inst = random_instance(m, rng, 0.2);
    const TransferMatrix t(inst.pi0);
    const Vec f = push(inst.pi0, inst.fv.probs());
    const Mat r_mv_mat = r_mv(t, OutcomeDist(f)).mat;

    const DrDecomposition dec = dr_decomposition(t, inst.fv);
    const Mat recomposed = subtract(add(dec.dm, dec.ips), dec.dips);
    out.max_decomp_gap = std::max(out.max_decomp_gap, max_abs_diff(r_mv_mat, recomposed));

    // mu_j = (p_j - C) P(V above rung j), straight from f_V.
    Vec mu(m, 0.0);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t s = j + 1; s <= m; ++s) mu[j] += inst.fv[s];
      mu[j] *= inst.ladder.margin(j);
    }
    const Vec c = corrupted(r_mv_mat, valuation_loss(inst.pi, inst.ladder));
    for (std::size_t j = 0; j < m; ++j) {
      for (bool sold : {true, false}) {
        const double reward = dr_loss(j, sold, inst.pi, mu, inst.pi0, inst.ladder);
        const double loss = c[sold ? j : m + j];
        out.max_loss_gap = std::max(out.max_loss_gap, std::abs(loss + reward));
      }
    }
  }
  return out;
}

namespace {

std::vector<MinimaxCandidate> candidates_for(const Propensities& pi0, double step,
                                             bool break_robust) {
  const TransferMatrix t(pi0);
  std::vector<MinimaxCandidate> out;
  Mat rob = r_robust(t).mat;
  if (break_robust) rob(1, 0) += 0.1;
  out.push_back({"robust", std::move(rob)});
  out.push_back({"ips", r_ips(pi0).mat});
  out.push_back({"cips", r_cips(pi0).mat});
  for (const Vec& fv : simplex_grid(pi0.size() + 1, step)) {
    out.push_back({"mv", r_mv(t, OutcomeDist(push(pi0, fv))).mat});
  }
  return out;
}

Mat maybe_broken_robust(const TransferMatrix& t, bool broken) {
  Mat r = r_robust(t).mat;
  if (broken) r(1, 0) += 0.1;  // row 0 meets l_V[0] = 0 and would go unnoticed
  return r;
}

CheckRow finish(std::string name, std::uint64_t seed, double err, double tol) {
  return CheckRow{std::move(name), seed, err, tol, err <= tol};
}

}  // namespace

CheckRow check_left_inverse(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const std::size_t m = 2 + i % 9;
    const RandomInstance inst = random_instance(m, rng);
    const TransferMatrix t(inst.pi0);
    const Vec fhat = random_simplex(2 * m, rng);
    const ReweightMatrix mv = r_mv(t, OutcomeDist(fhat));
    const ReweightMatrix rob{maybe_broken_robust(t, cfg.break_robust), EstimatorKind::kRobust};
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const ReweightMatrix sw = r_switching(mv, rob, SwitchingWeight(unif(rng)));
    for (const Mat* r : {&mv.mat, &rob.mat, &sw.mat}) {
      worst = std::max(worst, left_inverse_error(*r, inst.pi0));
    }
  }
  return finish("left_inverse_mv_robust_switching", cfg.seed, worst, 1e-9);
}

CheckRow check_generalized_inverse(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 1);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const std::size_t m = 2 + i % 9;
    const RandomInstance inst = random_instance(m, rng);
    const Mat t = reference_transfer(inst.pi0);
    const Mat ips = r_ips(inst.pi0).mat;
    const Mat cips = r_cips(inst.pi0).mat;
    for (std::size_t p = 0; p < cfg.policies_per_instance; ++p) {
      const Vec lv = valuation_loss(PolicyDist(random_simplex(m, rng)), inst.ladder);
      for (const Mat* r : {&ips, &cips}) {
        const Vec back = matvec_transposed(t, corrupted(*r, lv));
        worst = std::max(worst, max_abs_diff(back, lv));
      }
    }
  }
  return finish("generalized_inverse_ips_cips", cfg.seed, worst, 1e-9);
}

CheckRow check_unbiasedness(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 2);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.instances; ++i) {
    const std::size_t m = 2 + i % 5;
    const RandomInstance inst = random_instance(m, rng);
    const TransferMatrix t(inst.pi0);
    const ValuationLossVector lv{valuation_loss(inst.pi, inst.ladder)};
    double truth = 0.0;
    for (std::size_t s = 0; s <= m; ++s) truth += inst.fv[s] * lv.values[s];
    // MV at a deliberately wrong plug-in: unbiasedness must not depend on it.
    const ReweightMatrix mv = r_mv(t, OutcomeDist(random_simplex(2 * m, rng)));
    const ReweightMatrix rob{maybe_broken_robust(t, cfg.break_robust), EstimatorKind::kRobust};
    const std::vector<Mat> all = {mv.mat, rob.mat, r_ips(inst.pi0).mat, r_cips(inst.pi0).mat,
                                  r_switching(mv, rob, SwitchingWeight(0.3)).mat};
    for (const Mat& r : all) {
      worst = std::max(worst, std::abs(exact_expectation(r, lv, inst.fv, inst.pi0) - truth));
    }
  }
  return finish("unbiasedness_exact_expectation", cfg.seed, worst, 1e-10);
}

CheckRow check_dr_loss(const SuiteConfig& cfg) {
  const DrSweep s = dr_equivalence_sweep(cfg.instances, cfg.seed);
  return finish("dr_loss_equals_minus_mv_loss", cfg.seed, s.max_loss_gap, 1e-9);
}

CheckRow check_dr_decomposition(const SuiteConfig& cfg) {
  const DrSweep s = dr_equivalence_sweep(cfg.instances, cfg.seed);
  return finish("dr_decomposition_sum", cfg.seed, s.max_decomp_gap, 1e-8);
}

CheckRow check_qp_match(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 4);
  double worst = 0.0;
  for (std::size_t i = 0; i < cfg.qp_instances; ++i) {
    const std::size_t m = 2 + i % 5;
    const RandomInstance inst = random_instance(m, rng, 0.1);
    const Vec f = push(inst.pi0, inst.fv.probs());
    const Mat closed = r_mv(TransferMatrix(inst.pi0), OutcomeDist(f)).mat;
    worst = std::max(worst, max_abs_diff(closed, qp_min_variance(inst.pi0, f)));
  }
  return finish("mv_matches_null_space_qp", cfg.seed, worst, 1e-6);
}

CheckRow check_qp_perturbations(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 5);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::size_t beaten = 0;
  for (std::size_t i = 0; i < cfg.qp_instances; ++i) {
    const std::size_t m = 2 + i % 5;
    const RandomInstance inst = random_instance(m, rng, 0.1);
    const Vec f = push(inst.pi0, inst.fv.probs());
    const Mat closed = r_mv(TransferMatrix(inst.pi0), OutcomeDist(f)).mat;
    const Mat n = null_space_of_transpose(inst.pi0);
    const Mat nt = transpose(n);
    const Vec lv = valuation_loss(inst.pi, inst.ladder);
    const double base = enumerate_variance(closed, lv, f);
    for (std::size_t p = 0; p < cfg.qp_perturbations; ++p) {
      Mat z(m + 1, m - 1);
      const double size = std::pow(10.0, -3.0 + 3.0 * (p % 4) / 3.0);
      for (std::size_t a = 0; a < z.rows(); ++a) {
        for (std::size_t b = 0; b < z.cols(); ++b) z(a, b) = size * normal(rng);
      }
      const Mat r = add(closed, matmul(z, nt));
      if (enumerate_variance(r, lv, f) < base - 1e-12 * std::max(1.0, base)) ++beaten;
    }
  }
  return finish("mv_beats_random_feasible", cfg.seed, static_cast<double>(beaten), 0.0);
}

std::vector<CheckRow> check_minimax(const SuiteConfig& cfg, std::size_t m) {
  Rng rng = stream_rng(cfg.seed, 10 + m);
  const double step = default_grid_step(m);
  double worst_gap = -std::numeric_limits<double>::infinity();
  double worst_dist = 0.0;
  // A few propensity/policy draws; each runs the full grid.
  for (int rep = 0; rep < 3; ++rep) {
    const RandomInstance inst = random_instance(m, rng, 0.2);
    const Vec lv = valuation_loss(inst.pi, inst.ladder);
    const auto cands = candidates_for(inst.pi0, step, cfg.break_robust);
    const MinimaxResult res = minimax_grid(inst.pi0, lv, cands, step);
    double best_other = std::numeric_limits<double>::infinity();
    for (std::size_t c = 1; c < cands.size(); ++c) {
      best_other = std::min(best_other, res.worst_variance[c]);
    }
    worst_gap = std::max(worst_gap, res.worst_variance[0] - best_other);
    worst_dist = std::max(worst_dist, distance_to_adversary(res.first_argmax));
  }
  const std::string tag = "_m" + std::to_string(m);
  return {finish("minimax_robust_smallest_worst_case" + tag, cfg.seed, worst_gap, 1e-3),
          finish("minimax_adversary_location" + tag, cfg.seed, worst_dist, step + 1e-9)};
}

CheckRow check_policy_gradient(const SuiteConfig& cfg) {
  Rng rng = stream_rng(cfg.seed, 6);
  std::normal_distribution<double> normal(0.0, 1.0);
  constexpr double kStep = 1e-5;
  double worst = 0.0;
  for (std::size_t inst = 0; inst < 20; ++inst) {
    const std::size_t m = 2 + inst % 4;
    const std::size_t d = 1 + inst % 3;
    const std::size_t n = 15;
    std::vector<Vec> xs(n, Vec(d));
    LossTable table;
    for (auto& x : xs) {
      for (double& v : x) v = normal(rng);
      Vec a(m);
      for (double& v : a) v = normal(rng);
      table.coef.push_back(std::move(a));
    }
    Mat theta(m, d + 1);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k <= d; ++k) theta(j, k) = normal(rng);
    }
    const Mat analytic = empirical_loss_and_gradient(theta, xs, table).grad;
    Mat numeric(m, d + 1);
    for (std::size_t j = 0; j < m; ++j) {
      for (std::size_t k = 0; k <= d; ++k) {
        Mat up = theta;
        Mat down = theta;
        up(j, k) += kStep;
        down(j, k) -= kStep;
        numeric(j, k) = (empirical_loss_and_gradient(up, xs, table).loss -
                         empirical_loss_and_gradient(down, xs, table).loss) /
                        (2.0 * kStep);
      }
    }
    worst = std::max(worst, max_abs_diff(analytic, numeric) /
                                std::max(max_abs(numeric), 1e-12));
  }
  return finish("policy_gradient_finite_difference", cfg.seed, worst, 1e-4);
}

std::vector<CheckRow> run_suite(const SuiteConfig& cfg) {
  std::vector<CheckRow> rows = {check_left_inverse(cfg),     check_generalized_inverse(cfg),
                                check_unbiasedness(cfg),     check_dr_loss(cfg),
                                check_dr_decomposition(cfg), check_qp_match(cfg),
                                check_qp_perturbations(cfg)};
  for (std::size_t m : {2, 3}) {
    for (auto& r : check_minimax(cfg, m)) rows.push_back(std::move(r));
  }
  rows.push_back(check_policy_gradient(cfg));
  return rows;
}

std::string csv_header() { return "check,seed,max_error,pass"; }

std::string csv_row(const CheckRow& row) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6e", row.max_error);
  return row.check + "," + std::to_string(row.seed) + "," + buf + "," +
         (row.pass ? "true" : "false");
}

}  // namespace pricing::oracle
