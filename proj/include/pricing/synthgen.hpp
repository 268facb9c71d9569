// Synthetic pricing environments with known demand and latent valuations.

#ifndef PRICING_SYNTHGEN_HPP_
#define PRICING_SYNTHGEN_HPP_

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>

#include "pricing/demand.hpp"
#include "pricing/ladder.hpp"
#include "pricing/policy_value.hpp"

namespace pricing {

using Rng = std::mt19937_64;

// Independent stream `stream` of a base seed (splitmix64 over the pair), so
// replication r draws the same numbers whether run alone or in a batch.
Rng stream_rng(std::uint64_t seed, std::uint64_t stream);

enum class SurfaceVariant { kBase, kMisspecI, kMisspecII };

std::string_view to_string(SurfaceVariant v);
SurfaceVariant parse_surface_variant(std::string_view name);

// Demand sigma(w.x - slope(x) p - logit_shift) with slope per variant:
//   base      |x0 + x1 + x2|
//   misspecI  5 |x0 x1 x2 x3|
//   misspecII |x0 x1 + x1 x2 + x2 x3| / 3
struct DemandSurfaceSpec {
  SurfaceVariant variant = SurfaceVariant::kBase;
  Vec w;
  double logit_shift = 0.0;

  std::size_t dim() const { return w.size(); }
};

inline constexpr std::size_t kDefaultFeatureDim = 10;

// Draws w ~ U[0,1]^d. Throws if d is too small for the variant.
DemandSurfaceSpec sample_surface(SurfaceVariant variant, std::size_t d, double logit_shift,
                                 Rng& rng);

double surface_slope(const DemandSurfaceSpec& spec, std::span<const double> x);
double true_demand(const DemandSurfaceSpec& spec, std::span<const double> x, double price);

// The surface as a DemandModel over a ladder.
class SyntheticDemand final : public DemandModel {
 public:
  SyntheticDemand(DemandSurfaceSpec spec, PriceLadder ladder);

  std::size_t ladder_size() const override { return ladder_.size(); }
  const DemandSurfaceSpec& spec() const { return spec_; }

  // Unclamped demand; the sampler uses this, plug-ins use predict().
  Vec exact_all(std::span<const double> x) const;

 protected:
  double predict_raw(std::span<const double> x, std::size_t j) const override;

 private:
  DemandSurfaceSpec spec_;
  PriceLadder ladder_;
};

struct GenConfig {
  std::size_t n = 100;
  std::size_t d = kDefaultFeatureDim;
  Vec ladder{1, 2, 3, 4, 5};
  double lambda = 5.0;
  std::uint64_t seed = 0;
  SurfaceVariant variant = SurfaceVariant::kBase;
  double logit_shift = 0.0;
};

// softmax_j(lambda * demand_j).
Propensities logging_policy(std::span<const double> demand, double lambda);

Vec sample_features(std::size_t d, Rng& rng);

// Deterministic core of the sampler: the customer buys at rung j iff
// u <= demand_j, so one uniform fixes the whole (monotone) response curve.
ObservedRecord make_record(Vec features, std::span<const double> demand, double u,
                           std::size_t price);

class Environment {
 public:
  Environment(DemandSurfaceSpec spec, PriceLadder ladder, double lambda);

  const SyntheticDemand& demand() const { return demand_; }
  const PriceLadder& ladder() const { return ladder_; }
  double lambda() const { return lambda_; }

  Propensities logging(std::span<const double> x) const;
  // x ~ N(0, I), u ~ U[0,1], price ~ logging(x).
  ObservedRecord sample_record(Rng& rng) const;
  Dataset sample(std::size_t n, Rng& rng) const;
  std::vector<Vec> sample_features(std::size_t n, Rng& rng) const;

  // Expected revenue of a policy averaged over the given features.
  double expected_revenue(const PolicyFn& policy, const std::vector<Vec>& xs) const;
  // Exact expectation of l_V at each x (no valuation sampling), averaged.
  double expected_loss(const PolicyTable& policy, const std::vector<Vec>& xs) const;

 private:
  SyntheticDemand demand_;
  PriceLadder ladder_;
  double lambda_;
};

// Environment for one replication: w drawn from `rng`.
Environment make_environment(const GenConfig& config, Rng& rng);

// Mean of l_V(pi(x_i), V_i) over records with latent valuations.
double true_policy_value(const Dataset& data, const PolicyTable& policy);

}  // namespace pricing

#endif  // PRICING_SYNTHGEN_HPP_
