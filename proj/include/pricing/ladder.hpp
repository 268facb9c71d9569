// Domain types: the price ladder, logging propensities, the three
// distributions the estimators move between, and observed sales records.
//
// Indexing is 0-based throughout. Price index j (0..m-1) is the ladder rung
// p_{j+1}. Valuation slot s (0..m) means "buys at rungs 0..s-1 and not above";
// slot 0 is a customer who buys at no ladder price. Outcome index k in
// 0..2m-1 encodes (price j, sold) as j and (price j, not sold) as m + j.

#ifndef PRICING_LADDER_HPP_
#define PRICING_LADDER_HPP_

#include <cstddef>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pricing/densemat.hpp"

namespace pricing {

class DomainError : public std::invalid_argument {
 public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// Simplex entries are accepted when sum is within this of 1.
inline constexpr double kSimplexTolerance = 1e-9;

class PriceLadder {
 public:
  // Prices must be positive and strictly increasing. A rung at or below the
  // unit cost is allowed but reported by margin_warnings().
  explicit PriceLadder(Vec prices, double unit_cost = 0.0);

  std::size_t size() const { return prices_.size(); }
  double price(std::size_t j) const { return prices_.at(j); }
  double margin(std::size_t j) const { return prices_.at(j) - unit_cost_; }
  double unit_cost() const { return unit_cost_; }
  std::span<const double> prices() const { return prices_; }

  // One message per rung with p_j <= C.
  std::vector<std::string> margin_warnings() const;

 private:
  Vec prices_;
  double unit_cost_;
};

namespace detail {

void validate_simplex(std::span<const double> p, const char* name);

// Validated probability vector; Tag only distinguishes the strong types.
template <typename Tag>
class Distribution {
 public:
  Distribution() = default;
  explicit Distribution(Vec probs) : probs_(std::move(probs)) {
    validate_simplex(probs_, Tag::kName);
  }

  std::size_t size() const { return probs_.size(); }
  double operator[](std::size_t i) const { return probs_[i]; }
  std::span<const double> probs() const { return probs_; }
  const Vec& vec() const { return probs_; }

 private:
  Vec probs_;
};

struct PropensityTag { static constexpr const char* kName = "Propensities"; };
struct ValuationTag { static constexpr const char* kName = "ValuationDist"; };
struct OutcomeTag { static constexpr const char* kName = "OutcomeDist"; };
struct PolicyTag { static constexpr const char* kName = "PolicyDist"; };

}  // namespace detail

// Logging distribution pi_0(.|x) over the m rungs. Zero entries construct
// fine; overlap is checked by has_overlap() and by build_transfer().
class Propensities : public detail::Distribution<detail::PropensityTag> {
 public:
  using Distribution::Distribution;
  bool has_overlap() const;
  double min() const;
};

// f_V over m+1 valuation slots.
using ValuationDist = detail::Distribution<detail::ValuationTag>;
// f_Y~ over the 2m (price, sold) outcomes.
using OutcomeDist = detail::Distribution<detail::OutcomeTag>;
// pi(.|x) of a pricing policy being evaluated or learned.
using PolicyDist = detail::Distribution<detail::PolicyTag>;

// Uniform distribution helper, handy in tests and configs.
Vec uniform_probs(std::size_t n);

struct ObservedRecord {
  Vec features;
  std::size_t price = 0;  // 0-based rung offered
  bool sold = false;
  std::optional<std::size_t> valuation;  // slot 0..m, synthetic data only
};

// Logged data plus the logging propensities each record was drawn under.
struct Dataset {
  PriceLadder ladder{Vec{1.0}};
  std::vector<ObservedRecord> records;
  std::vector<Propensities> logging;

  std::size_t size() const { return records.size(); }
  std::size_t feature_dim() const {
    return records.empty() ? 0 : records.front().features.size();
  }
  bool has_valuations() const;
  // Subset by record index, keeping propensities aligned.
  Dataset subset(std::span<const std::size_t> idx) const;
};

// (price, sold) -> outcome index. price is 0-based: (0, sold) -> 0,
// (m-1, not sold) -> 2m-1.
std::size_t outcome_index(std::size_t price, bool sold, std::size_t m);

// Propensity floor below which validate() flags overlap.
inline constexpr double kPropensityFloor = 1e-6;

enum class FlagKind { kOverlap, kConsistency, kShape };

struct ValidationFlag {
  std::size_t record;
  FlagKind kind;
  std::string message;
};

struct ValidationReport {
  std::vector<ValidationFlag> flags;
  // Untestable from data; listed so reports state what was taken on trust.
  std::vector<std::string> assumed{"ignorability", "consistency"};
  double min_logged_propensity = 1.0;

  bool ok() const { return flags.empty(); }
};

// Report-only: flags records whose propensity at the offered price is below
// `floor`, and synthetic records whose sale contradicts their valuation.
ValidationReport validate(const Dataset& data, double floor = kPropensityFloor);

}  // namespace pricing

#endif  // PRICING_LADDER_HPP_
