#include "pricing/policy.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace pricing {
namespace {

// Raw softmax into `out`; no simplex validation on the hot path.
void softmax_scores(const Mat& theta, std::span<const double> x, Vec& out) {
  const std::size_t m = theta.rows();
  const std::size_t d = theta.cols() - 1;
  if (x.size() != d) {
    throw DomainError("policy expects " + std::to_string(d) + " features, got " +
                      std::to_string(x.size()));
  }
  out.resize(m);
  double top = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < m; ++j) {
    const auto row = theta.row(j);
    double s = row[d];
    for (std::size_t k = 0; k < d; ++k) s += row[k] * x[k];
    out[j] = s;
    top = std::max(top, s);
  }
  double total = 0.0;
  for (double& v : out) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : out) v /= total;
}

}  // namespace

PolicyDist policy_probs(const Mat& theta, std::span<const double> x) {
  Vec p;
  softmax_scores(theta, x, p);
  return PolicyDist(std::move(p));
}

LinearSoftmaxPolicy::LinearSoftmaxPolicy(Mat theta) : theta_(std::move(theta)) {
  if (theta_.rows() == 0 || theta_.cols() == 0) {
    throw DomainError("policy needs at least one price and a bias column");
  }
  if (!theta_.all_finite()) throw DomainError("non-finite policy parameters");
}

PolicyFn LinearSoftmaxPolicy::as_fn() const {
  return [theta = theta_](std::span<const double> x) { return policy_probs(theta, x); };
}

nlohmann::json LinearSoftmaxPolicy::to_json(const PriceLadder& ladder) const {
  nlohmann::json doc;
  doc["kind"] = "linear_softmax";
  doc["ladder"] = Vec(ladder.prices().begin(), ladder.prices().end());
  doc["unit_cost"] = ladder.unit_cost();
  doc["theta"] = nlohmann::json::array();
  for (std::size_t j = 0; j < theta_.rows(); ++j) {
    const auto row = theta_.row(j);
    doc["theta"].push_back(Vec(row.begin(), row.end()));
  }
  return doc;
}

LinearSoftmaxPolicy LinearSoftmaxPolicy::from_json(const nlohmann::json& doc) {
  if (doc.value("kind", std::string()) != "linear_softmax") {
    throw DomainError("not a linear_softmax policy document");
  }
  const auto& rows = doc.at("theta");
  if (!rows.is_array() || rows.empty()) throw DomainError("policy theta must be a nonempty array");
  const std::size_t cols = rows.front().size();
  Vec flat;
  for (const auto& r : rows) {
    Vec v = r.get<Vec>();
    if (v.size() != cols) throw DomainError("policy theta rows differ in length");
    flat.insert(flat.end(), v.begin(), v.end());
  }
  return LinearSoftmaxPolicy(Mat::from_rows(rows.size(), cols, std::move(flat)));
}

LossAndGradient empirical_loss_and_gradient(const Mat& theta,
                                            const std::vector<Vec>& features,
                                            const LossTable& table) {
  if (features.size() != table.size()) {
    throw DomainError("features and loss table differ in length");
  }
  const std::size_t m = theta.rows();
  const std::size_t d = theta.cols() - 1;
  LossAndGradient out{0.0, Mat(m, d + 1)};
  if (features.empty()) return out;
  const double inv_n = 1.0 / static_cast<double>(features.size());

  Vec pi;
  Vec ds(m);
  for (std::size_t i = 0; i < features.size(); ++i) {
    const auto& x = features[i];
    const auto& a = table.coef[i];
    softmax_scores(theta, x, pi);
    const double li = dot(a, pi);
    out.loss += li;
    for (std::size_t j = 0; j < m; ++j) ds[j] = pi[j] * (a[j] - li) * inv_n;
    for (std::size_t j = 0; j < m; ++j) {
      auto g = out.grad.row(j);
      for (std::size_t k = 0; k < d; ++k) g[k] += ds[j] * x[k];
      g[d] += ds[j];
    }
  }
  out.loss *= inv_n;
  return out;
}

TrainResult optimize_policy(const std::vector<Vec>& features, const LossTable& table,
                            std::size_t ladder_size, const TrainConfig& config) {
  if (!(config.learning_rate > 0.0)) throw DomainError("learning rate must be positive");
  if (features.empty()) throw DomainError("cannot train on an empty dataset");
  const std::size_t d = features.front().size();
  Mat theta(ladder_size, d + 1);
  Mat m1(ladder_size, d + 1);
  Mat m2(ladder_size, d + 1);
  TrainResult res{LinearSoftmaxPolicy(ladder_size, d), {}, 0};
  res.trajectory.reserve(config.max_iters + 1);

  double b1t = 1.0;
  double b2t = 1.0;
  for (std::size_t it = 0; it <= config.max_iters; ++it) {
    const LossAndGradient lg = empirical_loss_and_gradient(theta, features, table);
    if (!std::isfinite(lg.loss) || !lg.grad.all_finite()) {
      throw std::runtime_error("policy training diverged at iteration " +
                               std::to_string(it) + " (loss " + std::to_string(lg.loss) +
                               ")");
    }
    res.trajectory.push_back(lg.loss);
    if (it >= kDescentWindow &&
        lg.loss > res.trajectory[it - kDescentWindow] + kDescentSlack) {
      ++res.descent_violations;
    }
    if (it == config.max_iters) break;

    b1t *= config.beta1;
    b2t *= config.beta2;
    auto g = lg.grad.data();
    auto mm = m1.data();
    auto vv = m2.data();
    auto th = theta.data();
    for (std::size_t k = 0; k < g.size(); ++k) {
      mm[k] = config.beta1 * mm[k] + (1.0 - config.beta1) * g[k];
      vv[k] = config.beta2 * vv[k] + (1.0 - config.beta2) * g[k] * g[k];
      const double mhat = mm[k] / (1.0 - b1t);
      const double vhat = vv[k] / (1.0 - b2t);
      th[k] -= config.learning_rate * mhat / (std::sqrt(vhat) + config.eps);
    }
  }
  res.policy = LinearSoftmaxPolicy(std::move(theta));
  return res;
}

namespace {

std::vector<Vec> features_of(const Dataset& data) {
  std::vector<Vec> xs;
  xs.reserve(data.size());
  for (const auto& r : data.records) xs.push_back(r.features);
  return xs;
}

LossTable rows_of(const LossTable& table, std::span<const std::size_t> idx) {
  LossTable out;
  out.coef.reserve(idx.size());
  for (std::size_t i : idx) out.coef.push_back(table.coef.at(i));
  return out;
}

}  // namespace

SwitchingWeight select_c_for_learning(const Dataset& data, const LossTable& mv,
                                      const LossTable& rob, std::span<const double> grid,
                                      const TrainConfig& config, std::size_t folds) {
  if (grid.empty()) throw DomainError("empty switching grid");
  if (grid.size() == 1) return SwitchingWeight(grid.front());
  if (folds < 2 || data.size() < folds) {
    throw DomainError("cross validation needs at least 2 folds and one record per fold");
  }
  const std::size_t m = data.ladder.size();
  const auto fold = fold_assignment(data.size(), folds);
  const std::vector<Vec> xs = features_of(data);

  double best = std::numeric_limits<double>::infinity();
  double best_c = grid.front();
  for (double c_value : grid) {
    const SwitchingWeight c(c_value);
    const LossTable mixed = mix_tables(mv, rob, c);
    double held_total = 0.0;
    for (std::size_t f = 0; f < folds; ++f) {
      std::vector<std::size_t> train, held;
      for (std::size_t i = 0; i < data.size(); ++i) (fold[i] == f ? held : train).push_back(i);
      std::vector<Vec> train_x, held_x;
      for (std::size_t i : train) train_x.push_back(xs[i]);
      for (std::size_t i : held) held_x.push_back(xs[i]);
      const TrainResult tr = optimize_policy(train_x, rows_of(mixed, train), m, config);
      const LossTable held_table = rows_of(mixed, held);
      for (std::size_t h = 0; h < held.size(); ++h) {
        held_total += held_table.loss(h, tr.policy.probs(held_x[h]).probs());
      }
    }
    const double held_mean = held_total / static_cast<double>(data.size());
    if (held_mean < best) {
      best = held_mean;
      best_c = c_value;
    }
  }
  return SwitchingWeight(best_c);
}

LearnedPolicy optimize_policy(const Dataset& data, const EstimatorSpec& spec,
                              const DemandModel* demand, const TrainConfig& config) {
  const std::vector<Vec> xs = features_of(data);
  const std::size_t m = data.ladder.size();
  if (spec.kind != EstimatorKind::kSwitching) {
    return {optimize_policy(xs, build_loss_table(data, spec.kind, demand), m, config),
            std::nullopt};
  }
  const LossTable mv = build_loss_table(data, EstimatorKind::kMv, demand);
  const LossTable rob = build_loss_table(data, EstimatorKind::kRobust, nullptr);
  const Vec grid = default_c_grid();
  const SwitchingWeight c =
      spec.c ? SwitchingWeight(*spec.c)
             : select_c_for_learning(data, mv, rob, grid, config, spec.folds);
  return {optimize_policy(xs, mix_tables(mv, rob, c), m, config), c.value()};
}

std::size_t greedy_price(std::span<const double> demand, const PriceLadder& ladder) {
  if (demand.size() != ladder.size()) throw DomainError("demand does not match the ladder");
  std::size_t best = 0;
  double best_value = ladder.margin(0) * demand[0];
  for (std::size_t j = 1; j < demand.size(); ++j) {
    const double v = ladder.margin(j) * demand[j];
    if (v > best_value) {
      best_value = v;
      best = j;
    }
  }
  return best;
}

PolicyFn target_policy_for_evaluation(std::shared_ptr<const DemandModel> demand,
                                      const PriceLadder& ladder) {
  if (!demand) throw DomainError("target policy needs a demand model");
  return [demand, ladder](std::span<const double> x) {
    Vec p(ladder.size(), 0.0);
    p[greedy_price(demand->predict_all(x), ladder)] = 1.0;
    return PolicyDist(std::move(p));
  };
}

double expected_revenue(const PolicyDist& pi, std::span<const double> demand,
                        const PriceLadder& ladder) {
  if (pi.size() != ladder.size() || demand.size() != ladder.size()) {
    throw DomainError("expected_revenue: shape mismatch");
  }
  double total = 0.0;
  for (std::size_t j = 0; j < pi.size(); ++j) total += pi[j] * ladder.margin(j) * demand[j];
  return total;
}

}  // namespace pricing
