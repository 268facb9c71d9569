#include "pricing/demand.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace pricing {
namespace {

double softplus(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double clamp_prob(double p) { return std::clamp(p, kDemandClampLo, kDemandClampHi); }

LogisticPredictor constant_predictor(std::size_t d, double rate) {
  LogisticPredictor out{Vec(d + 1, 0.0)};
  out.weights[d] = logit(clamp_prob(rate));
  return out;
}

double penalized_objective(const LogisticPredictor& model,
                           const std::vector<Vec>& features,
                           const std::vector<int>& labels, double l2) {
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = model.score(features[i]);
    total += softplus(z) - (labels[i] ? z : 0.0);
  }
  double penalty = 0.0;
  for (std::size_t k = 0; k + 1 < model.weights.size(); ++k) {
    penalty += model.weights[k] * model.weights[k];
  }
  return total / static_cast<double>(features.size()) + 0.5 * l2 * penalty;
}

}  // namespace

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double logit(double p) { return std::log(p / (1.0 - p)); }

double DemandModel::predict(std::span<const double> x, std::size_t j) const {
  return clamp_prob(predict_raw(x, j));
}

Vec DemandModel::predict_all(std::span<const double> x) const {
  Vec g(ladder_size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = predict(x, j);
  return g;
}

double LogisticPredictor::score(std::span<const double> x) const {
  if (x.size() + 1 != weights.size()) {
    throw DomainError("logistic predictor expects " +
                      std::to_string(weights.size() - 1) + " features, got " +
                      std::to_string(x.size()));
  }
  double z = weights.back();
  for (std::size_t k = 0; k < x.size(); ++k) z += weights[k] * x[k];
  return z;
}

LogisticFitResult fit_logistic(const std::vector<Vec>& features,
                               const std::vector<int>& labels,
                               const LogisticFitConfig& config) {
  if (features.empty()) throw DomainError("fit_logistic: empty training set");
  if (features.size() != labels.size()) {
    throw DomainError("fit_logistic: features and labels differ in length");
  }
  const std::size_t n = features.size();
  const std::size_t d = features.front().size();
  const std::size_t dim = d + 1;

  std::size_t positives = 0;
  for (int y : labels) positives += y ? 1 : 0;
  if (positives == 0 || positives == n) {
    return {constant_predictor(d, static_cast<double>(positives) / n), 0, 0.0, true};
  }

  // Start from the base rate so the bias does not have to travel far.
  LogisticFitResult res{constant_predictor(d, static_cast<double>(positives) / n)};
  const double inv_n = 1.0 / static_cast<double>(n);
  const double l2 = config.l2;
  double obj = penalized_objective(res.predictor, features, labels, l2);

  for (res.iters = 0; res.iters < config.max_iters; ++res.iters) {
    Vec grad(dim, 0.0);
    Mat hess(dim, dim);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& x = features[i];
      const double p = res.predictor.predict(x);
      const double r = (p - (labels[i] ? 1.0 : 0.0)) * inv_n;
      const double w = p * (1.0 - p) * inv_n;
      for (std::size_t a = 0; a < dim; ++a) {
        const double xa = a < d ? x[a] : 1.0;
        grad[a] += r * xa;
        for (std::size_t b = 0; b <= a; ++b) {
          hess(a, b) += w * xa * (b < d ? x[b] : 1.0);
        }
      }
    }
    for (std::size_t a = 0; a < d; ++a) {
      grad[a] += l2 * res.predictor.weights[a];
      hess(a, a) += l2;
    }
    hess(d, d) += 1e-12;
    for (std::size_t a = 0; a < dim; ++a) {
      for (std::size_t b = a + 1; b < dim; ++b) hess(a, b) = hess(b, a);
    }

    res.grad_norm = 0.0;
    for (double g : grad) res.grad_norm = std::max(res.grad_norm, std::abs(g));
    if (res.grad_norm < config.grad_tol) {
      res.converged = true;
      return res;
    }

    const Vec step = solve(hess, std::span<const double>(grad));
    double slope = 0.0;
    for (std::size_t a = 0; a < dim; ++a) slope += grad[a] * step[a];

    double t = 1.0;
    LogisticPredictor trial = res.predictor;
    double trial_obj = obj;
    for (int halvings = 0; halvings < 60; ++halvings, t *= 0.5) {
      for (std::size_t a = 0; a < dim; ++a) {
        trial.weights[a] = res.predictor.weights[a] - t * step[a];
      }
      trial_obj = penalized_objective(trial, features, labels, l2);
      if (trial_obj <= obj - 1e-4 * t * slope) break;
    }
    if (!(trial_obj <= obj)) break;  // no progress possible at this precision
    res.predictor = std::move(trial);
    obj = trial_obj;
  }
  return res;
}

double log_loss(const LogisticPredictor& predictor, const std::vector<Vec>& features,
                const std::vector<int>& labels) {
  if (features.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < features.size(); ++i) {
    const double z = predictor.score(features[i]);
    total += softplus(z) - (labels[i] ? z : 0.0);
  }
  return total / static_cast<double>(features.size());
}

TLearnerDemand::TLearnerDemand(std::vector<LogisticPredictor> per_price)
    : per_price_(std::move(per_price)) {
  if (per_price_.empty()) throw DomainError("demand model needs at least one rung");
  for (const auto& p : per_price_) {
    if (p.weights.size() != per_price_.front().weights.size()) {
      throw DomainError("per-price predictors disagree on feature dimension");
    }
    for (double w : p.weights) {
      if (!std::isfinite(w)) throw DomainError("non-finite demand weight");
    }
  }
}

double TLearnerDemand::predict_raw(std::span<const double> x, std::size_t j) const {
  return per_price_.at(j).predict(x);
}

nlohmann::json TLearnerDemand::to_json() const {
  nlohmann::json doc;
  doc["kind"] = "tlearner_logistic";
  doc["weights"] = nlohmann::json::array();
  for (const auto& p : per_price_) doc["weights"].push_back(p.weights);
  return doc;
}

TLearnerDemand TLearnerDemand::from_json(const nlohmann::json& doc) {
  if (doc.value("kind", std::string()) != "tlearner_logistic") {
    throw DomainError("not a tlearner_logistic demand document");
  }
  std::vector<LogisticPredictor> per_price;
  for (const auto& w : doc.at("weights")) per_price.push_back({w.get<Vec>()});
  return TLearnerDemand(std::move(per_price));
}

TLearnerDemand fit_tlearner(const Dataset& data, const LogisticFitConfig& config) {
  if (data.size() == 0) throw DomainError("fit_tlearner: empty dataset");
  const std::size_t m = data.ladder.size();
  const std::size_t d = data.feature_dim();
  std::vector<std::vector<Vec>> xs(m);
  std::vector<std::vector<int>> ys(m);
  std::size_t sold = 0;
  for (const auto& r : data.records) {
    if (r.price >= m) throw DomainError("record price index outside the ladder");
    xs[r.price].push_back(r.features);
    ys[r.price].push_back(r.sold ? 1 : 0);
    sold += r.sold ? 1 : 0;
  }
  const double pooled = static_cast<double>(sold) / static_cast<double>(data.size());
  std::vector<LogisticPredictor> per_price;
  per_price.reserve(m);
  for (std::size_t j = 0; j < m; ++j) {
    if (xs[j].empty()) {
      per_price.push_back(constant_predictor(d, pooled));
    } else {
      per_price.push_back(fit_logistic(xs[j], ys[j], config).predictor);
    }
  }
  return TLearnerDemand(std::move(per_price));
}

BlendedDemand::BlendedDemand(std::shared_ptr<const DemandModel> truth, double alpha)
    : truth_(std::move(truth)), alpha_(alpha) {
  if (!truth_) throw DomainError("blended demand needs a base model");
  if (!(alpha >= 0.0 && alpha <= 1.0)) {
    throw DomainError("blend weight must lie in [0, 1], got " + std::to_string(alpha));
  }
}

double BlendedDemand::predict_raw(std::span<const double> x, std::size_t j) const {
  // Blend the clamped truth so alpha = 1 reproduces predict() of the base.
  return alpha_ * truth_->predict(x, j) + (1.0 - alpha_) * kUninformedRate;
}

OutcomeDist outcome_dist_from_demand(std::span<const double> g, const Propensities& pi0) {
  const std::size_t m = pi0.size();
  if (g.size() != m) throw DomainError("demand and propensities differ in length");
  Vec f(2 * m);
  for (std::size_t j = 0; j < m; ++j) {
    f[j] = g[j] * pi0[j];
    f[m + j] = (1.0 - g[j]) * pi0[j];
  }
  return OutcomeDist(std::move(f));
}

OutcomeDist fY_hat(const DemandModel& model, const Propensities& pi0,
                   std::span<const double> x) {
  return outcome_dist_from_demand(model.predict_all(x), pi0);
}

Vec isotonic_nonincreasing(std::span<const double> values) {
  // Blocks of (mean, count); merge while a later block exceeds an earlier one.
  std::vector<std::pair<double, std::size_t>> blocks;
  for (double v : values) {
    blocks.emplace_back(v, 1);
    while (blocks.size() > 1 &&
           blocks[blocks.size() - 2].first < blocks.back().first) {
      auto [mean, count] = blocks.back();
      blocks.pop_back();
      auto& prev = blocks.back();
      prev.first = (prev.first * prev.second + mean * count) /
                   static_cast<double>(prev.second + count);
      prev.second += count;
    }
  }
  Vec out;
  out.reserve(values.size());
  for (const auto& [mean, count] : blocks) out.insert(out.end(), count, mean);
  return out;
}

ValuationPlugIn fV_hat_and_mu(std::span<const double> g, const PriceLadder& ladder) {
  const std::size_t m = ladder.size();
  if (g.size() != m) throw DomainError("demand vector does not match the ladder");
  Vec survival = isotonic_nonincreasing(g);
  for (double& s : survival) s = std::clamp(s, 0.0, 1.0);

  Vec fv(m + 1);
  fv[0] = 1.0 - survival[0];
  for (std::size_t s = 1; s < m; ++s) fv[s] = survival[s - 1] - survival[s];
  fv[m] = survival[m - 1];
  double total = 0.0;
  for (double& v : fv) {
    v = std::max(v, 0.0);
    total += v;
  }
  for (double& v : fv) v /= total;

  Vec mu(m);
  for (std::size_t j = 0; j < m; ++j) mu[j] = ladder.margin(j) * survival[j];
  return {ValuationDist(std::move(fv)), std::move(survival), std::move(mu)};
}

ValuationPlugIn fV_hat_and_mu(const DemandModel& model, const PriceLadder& ladder,
                              std::span<const double> x) {
  return fV_hat_and_mu(model.predict_all(x), ladder);
}

}  // namespace pricing
