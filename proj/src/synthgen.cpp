#include "pricing/synthgen.hpp"

#include <algorithm>
#include <cmath>

#include "pricing/losses.hpp"
#include "pricing/policy.hpp"

namespace pricing {
namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::size_t min_dim(SurfaceVariant v) { return v == SurfaceVariant::kBase ? 3 : 4; }

}  // namespace

Rng stream_rng(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed;
  const std::uint64_t a = splitmix64(state);
  state ^= stream * 0xd1b54a32d192ed03ULL;
  const std::uint64_t b = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(a), static_cast<std::uint32_t>(a >> 32),
                    static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32)};
  return Rng(seq);
}

std::string_view to_string(SurfaceVariant v) {
  switch (v) {
    case SurfaceVariant::kBase: return "base";
    case SurfaceVariant::kMisspecI: return "misspecI";
    case SurfaceVariant::kMisspecII: return "misspecII";
  }
  return "?";
}

SurfaceVariant parse_surface_variant(std::string_view name) {
  if (name == "base") return SurfaceVariant::kBase;
  if (name == "misspecI") return SurfaceVariant::kMisspecI;
  if (name == "misspecII") return SurfaceVariant::kMisspecII;
  throw DomainError("unknown demand surface '" + std::string(name) + "'");
}

DemandSurfaceSpec sample_surface(SurfaceVariant variant, std::size_t d, double logit_shift,
                                 Rng& rng) {
  if (d < min_dim(variant)) {
    throw DomainError("surface " + std::string(to_string(variant)) + " needs d >= " +
                      std::to_string(min_dim(variant)));
  }
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  DemandSurfaceSpec spec{variant, Vec(d), logit_shift};
  for (double& w : spec.w) w = unif(rng);
  return spec;
}

double surface_slope(const DemandSurfaceSpec& spec, std::span<const double> x) {
  if (x.size() != spec.dim()) {
    throw DomainError("surface expects " + std::to_string(spec.dim()) + " features, got " +
                      std::to_string(x.size()));
  }
  if (x.size() < min_dim(spec.variant)) throw DomainError("feature dimension too small");
  switch (spec.variant) {
    case SurfaceVariant::kBase: return std::abs(x[0] + x[1] + x[2]);
    case SurfaceVariant::kMisspecI: return 5.0 * std::abs(x[0] * x[1] * x[2] * x[3]);
    case SurfaceVariant::kMisspecII:
      return std::abs(x[0] * x[1] + x[1] * x[2] + x[2] * x[3]) / 3.0;
  }
  return 0.0;
}

double true_demand(const DemandSurfaceSpec& spec, std::span<const double> x, double price) {
  const double slope = surface_slope(spec, x);
  double score = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) score += spec.w[k] * x[k];
  return sigmoid(score - slope * price - spec.logit_shift);
}

SyntheticDemand::SyntheticDemand(DemandSurfaceSpec spec, PriceLadder ladder)
    : spec_(std::move(spec)), ladder_(std::move(ladder)) {}

double SyntheticDemand::predict_raw(std::span<const double> x, std::size_t j) const {
  return true_demand(spec_, x, ladder_.price(j));
}

Vec SyntheticDemand::exact_all(std::span<const double> x) const {
  Vec g(ladder_.size());
  for (std::size_t j = 0; j < g.size(); ++j) g[j] = predict_raw(x, j);
  return g;
}

Propensities logging_policy(std::span<const double> demand, double lambda) {
  Vec p(demand.size());
  double top = -INFINITY;
  for (std::size_t j = 0; j < p.size(); ++j) {
    p[j] = lambda * demand[j];
    top = std::max(top, p[j]);
  }
  double total = 0.0;
  for (double& v : p) {
    v = std::exp(v - top);
    total += v;
  }
  for (double& v : p) v /= total;
  return Propensities(std::move(p));
}

Vec sample_features(std::size_t d, Rng& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Vec x(d);
  for (double& v : x) v = normal(rng);
  return x;
}

ObservedRecord make_record(Vec features, std::span<const double> demand, double u,
                           std::size_t price) {
  if (price >= demand.size()) throw DomainError("price index outside the ladder");
  std::size_t valuation = 0;
  for (std::size_t j = 0; j < demand.size(); ++j) {
    if (u <= demand[j]) valuation = j + 1;
  }
  return ObservedRecord{std::move(features), price, price < valuation, valuation};
}

Environment::Environment(DemandSurfaceSpec spec, PriceLadder ladder, double lambda)
    : demand_(std::move(spec), ladder), ladder_(std::move(ladder)), lambda_(lambda) {}

Propensities Environment::logging(std::span<const double> x) const {
  return logging_policy(demand_.exact_all(x), lambda_);
}

ObservedRecord Environment::sample_record(Rng& rng) const {
  Vec x = pricing::sample_features(demand_.spec().dim(), rng);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  const double u = unif(rng);
  const Vec g = demand_.exact_all(x);
  const Propensities pi0 = logging_policy(g, lambda_);
  std::discrete_distribution<std::size_t> pick(pi0.vec().begin(), pi0.vec().end());
  const std::size_t price = pick(rng);
  return make_record(std::move(x), g, u, price);
}

Dataset Environment::sample(std::size_t n, Rng& rng) const {
  Dataset data{ladder_, {}, {}};
  data.records.reserve(n);
  data.logging.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    data.records.push_back(sample_record(rng));
    data.logging.push_back(logging(data.records.back().features));
  }
  return data;
}

std::vector<Vec> Environment::sample_features(std::size_t n, Rng& rng) const {
  std::vector<Vec> xs;
  xs.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    xs.push_back(pricing::sample_features(demand_.spec().dim(), rng));
  }
  return xs;
}

double Environment::expected_revenue(const PolicyFn& policy,
                                     const std::vector<Vec>& xs) const {
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (const auto& x : xs) {
    total += pricing::expected_revenue(policy(x), demand_.exact_all(x), ladder_);
  }
  return total / static_cast<double>(xs.size());
}

double Environment::expected_loss(const PolicyTable& policy,
                                  const std::vector<Vec>& xs) const {
  if (policy.size() != xs.size()) throw DomainError("policy table and features differ");
  if (xs.empty()) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    // f_V from survival differences of the exact demand.
    const Vec g = demand_.exact_all(xs[i]);
    const ValuationLossVector lv = valuation_loss_vector(policy[i], ladder_);
    double upper = 1.0;
    for (std::size_t s = 0; s <= g.size(); ++s) {
      const double lower = s < g.size() ? g[s] : 0.0;
      total += (upper - lower) * lv.values[s];
      upper = lower;
    }
  }
  return total / static_cast<double>(xs.size());
}

Environment make_environment(const GenConfig& config, Rng& rng) {
  return Environment(sample_surface(config.variant, config.d, config.logit_shift, rng),
                     PriceLadder(config.ladder), config.lambda);
}

double true_policy_value(const Dataset& data, const PolicyTable& policy) {
  if (policy.size() != data.size()) throw DomainError("policy table and dataset differ");
  if (data.size() == 0) return 0.0;
  double total = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& v = data.records[i].valuation;
    if (!v) throw DomainError("record " + std::to_string(i) + " has no latent valuation");
    total += valuation_loss_vector(policy[i], data.ladder).values.at(*v);
  }
  return total / static_cast<double>(data.size());
}

}  // namespace pricing
