#include "pricing/policy_value.hpp"

#include <limits>

#include "pricing/losses.hpp"
#include "pricing/transfer.hpp"

namespace pricing {
namespace {

double sample_variance(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(v.size() - 1);
}

void check_aligned(const Dataset& data, std::size_t rows, const char* what) {
  if (rows != data.size()) {
    throw DomainError(std::string(what) + " has " + std::to_string(rows) +
                      " rows for " + std::to_string(data.size()) + " records");
  }
}

}  // namespace

double LossTable::loss(std::size_t i, std::span<const double> pi) const {
  return dot(coef.at(i), pi);
}

LossTable build_loss_table(const Dataset& data, EstimatorKind kind,
                           const DemandModel* demand) {
  if (kind == EstimatorKind::kSwitching) {
    throw DomainError("switching tables are mixed from MV and Robust tables");
  }
  if (needs_demand(kind) && demand == nullptr) {
    throw DomainError(std::string(to_string(kind)) + " needs a demand model");
  }
  check_aligned(data, data.logging.size(), "logging propensities");
  const PriceLadder& ladder = data.ladder;
  const std::size_t m = ladder.size();

  LossTable table;
  table.coef.reserve(data.size());
  for (std::size_t i = 0; i < data.size(); ++i) {
    const ObservedRecord& rec = data.records[i];
    const Propensities& pi0 = data.logging[i];
    if (pi0.size() != m) throw DomainError("propensities do not match the ladder");
    if (!pi0.has_overlap()) {
      throw DomainError("overlap violated at record " + std::to_string(i));
    }
    const std::size_t k = outcome_index(rec.price, rec.sold, m);
    switch (kind) {
      case EstimatorKind::kDr: {
        const ValuationPlugIn plug = fV_hat_and_mu(*demand, ladder, rec.features);
        Vec a(m);
        for (std::size_t j = 0; j < m; ++j) a[j] = -plug.mu[j];
        const double observed = rec.sold ? ladder.margin(rec.price) : 0.0;
        a[rec.price] -= (observed - plug.mu[rec.price]) / pi0[rec.price];
        table.coef.push_back(std::move(a));
        break;
      }
      case EstimatorKind::kIps:
        table.coef.push_back(loss_coefficients(r_ips(pi0).mat, k, ladder));
        break;
      case EstimatorKind::kCips:
        table.coef.push_back(loss_coefficients(r_cips(pi0).mat, k, ladder));
        break;
      case EstimatorKind::kRobust:
        table.coef.push_back(loss_coefficients(r_robust(TransferMatrix(pi0)).mat, k, ladder));
        break;
      case EstimatorKind::kMv: {
        const TransferMatrix t(pi0);
        const OutcomeDist fy = fY_hat(*demand, pi0, rec.features);
        table.coef.push_back(loss_coefficients(r_mv(t, fy).mat, k, ladder));
        break;
      }
      case EstimatorKind::kSwitching:
        break;
    }
  }
  return table;
}

LossTable mix_tables(const LossTable& mv, const LossTable& rob, SwitchingWeight c) {
  if (mv.size() != rob.size()) throw DomainError("mix_tables: row count mismatch");
  LossTable out;
  out.coef.reserve(mv.size());
  for (std::size_t i = 0; i < mv.size(); ++i) {
    Vec a(mv.coef[i].size());
    for (std::size_t j = 0; j < a.size(); ++j) {
      a[j] = c.value() * mv.coef[i][j] + (1.0 - c.value()) * rob.coef[i][j];
    }
    out.coef.push_back(std::move(a));
  }
  return out;
}

PolicyTable tabulate_policy(const Dataset& data, const PolicyFn& policy) {
  PolicyTable out;
  out.reserve(data.size());
  for (const auto& r : data.records) out.push_back(policy(r.features));
  return out;
}

Vec per_record_losses(const LossTable& table, const PolicyTable& policy) {
  if (table.size() != policy.size()) {
    throw DomainError("loss table and policy table differ in length");
  }
  Vec out(table.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = table.loss(i, policy[i].probs());
  return out;
}

double mean_loss(const LossTable& table, const PolicyTable& policy) {
  const Vec losses = per_record_losses(table, policy);
  if (losses.empty()) return 0.0;
  double total = 0.0;
  for (double v : losses) total += v;
  return total / static_cast<double>(losses.size());
}

Vec default_c_grid() {
  Vec grid(10);
  for (std::size_t i = 0; i < grid.size(); ++i) grid[i] = static_cast<double>(i) / 9.0;
  return grid;
}

std::vector<std::size_t> fold_assignment(std::size_t n, std::size_t k) {
  if (k == 0) throw DomainError("need at least one fold");
  std::vector<std::size_t> fold(n);
  for (std::size_t i = 0; i < n; ++i) fold[i] = i % k;
  return fold;
}

SwitchingWeight select_c_for_evaluation(const Dataset& data, const PolicyTable& policy,
                                        const DemandModel* demand,
                                        const DemandFitter& refit,
                                        std::span<const double> grid, std::size_t folds) {
  if (grid.empty()) throw DomainError("empty switching grid");
  for (double c : grid) static_cast<void>(SwitchingWeight(c));
  if (grid.size() == 1) return SwitchingWeight(grid.front());
  check_aligned(data, policy.size(), "policy table");

  const Vec rob = per_record_losses(build_loss_table(data, EstimatorKind::kRobust, nullptr),
                                    policy);
  Vec mv(data.size());
  if (refit && folds > 1 && data.size() >= folds) {
    const auto fold = fold_assignment(data.size(), folds);
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train, held;
      for (std::size_t i = 0; i < data.size(); ++i) {
        (fold[i] == f ? held : train).push_back(i);
      }
      const auto model = refit(data.subset(train));
      const Dataset held_data = data.subset(held);
      const LossTable table = build_loss_table(held_data, EstimatorKind::kMv, model.get());
      for (std::size_t h = 0; h < held.size(); ++h) {
        mv[held[h]] = table.loss(h, policy[held[h]].probs());
      }
    }
  } else {
    mv = per_record_losses(build_loss_table(data, EstimatorKind::kMv, demand), policy);
  }

  double best_var = std::numeric_limits<double>::infinity();
  double best_c = grid.front();
  Vec mixed(data.size());
  for (double c : grid) {
    for (std::size_t i = 0; i < mixed.size(); ++i) mixed[i] = c * mv[i] + (1.0 - c) * rob[i];
    const double v = sample_variance(mixed);
    if (v < best_var) {
      best_var = v;
      best_c = c;
    }
  }
  return SwitchingWeight(best_c);
}

PolicyValueEstimate estimate_policy_value(const Dataset& data, const PolicyTable& policy,
                                          const EstimatorSpec& spec,
                                          const DemandModel* demand,
                                          const DemandFitter& refit) {
  check_aligned(data, policy.size(), "policy table");
  PolicyValueEstimate out;
  if (spec.kind == EstimatorKind::kSwitching) {
    if (demand == nullptr) throw DomainError("CMix needs a demand model");
    const SwitchingWeight c =
        spec.c ? SwitchingWeight(*spec.c)
               : select_c_for_evaluation(data, policy, demand, refit, default_c_grid(),
                                         spec.folds);
    out.c = c.value();
    const LossTable table =
        mix_tables(build_loss_table(data, EstimatorKind::kMv, demand),
                   build_loss_table(data, EstimatorKind::kRobust, nullptr), c);
    out.per_record = per_record_losses(table, policy);
  } else {
    out.per_record = per_record_losses(build_loss_table(data, spec.kind, demand), policy);
  }
  double total = 0.0;
  for (double v : out.per_record) total += v;
  out.loss = out.per_record.empty() ? 0.0 : total / static_cast<double>(out.per_record.size());
  out.variance = sample_variance(out.per_record);
  return out;
}

}  // namespace pricing
