#include "pricing/ladder.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace pricing {

PriceLadder::PriceLadder(Vec prices, double unit_cost)
    : prices_(std::move(prices)), unit_cost_(unit_cost) {
  if (prices_.empty()) throw DomainError("price ladder must have at least one rung");
  if (!std::isfinite(unit_cost_) || unit_cost_ < 0.0) {
    throw DomainError("unit cost must be finite and nonnegative");
  }
  for (std::size_t j = 0; j < prices_.size(); ++j) {
    if (!std::isfinite(prices_[j]) || prices_[j] <= 0.0) {
      throw DomainError("price " + std::to_string(j) + " must be positive");
    }
    if (j > 0 && prices_[j] <= prices_[j - 1]) {
      throw DomainError("prices must be strictly increasing");
    }
  }
}

std::vector<std::string> PriceLadder::margin_warnings() const {
  std::vector<std::string> out;
  for (std::size_t j = 0; j < prices_.size(); ++j) {
    if (prices_[j] <= unit_cost_) {
      std::ostringstream os;
      os << "rung " << j << " price " << prices_[j] << " <= unit cost "
         << unit_cost_;
      out.push_back(os.str());
    }
  }
  return out;
}

namespace detail {

void validate_simplex(std::span<const double> p, const char* name) {
  if (p.empty()) throw DomainError(std::string(name) + ": empty vector");
  double sum = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    if (!std::isfinite(p[i]) || p[i] < 0.0) {
      throw DomainError(std::string(name) + ": entry " + std::to_string(i) +
                        " is negative or non-finite");
    }
    sum += p[i];
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    std::ostringstream os;
    os.precision(17);
    os << name << ": entries sum to " << sum << ", expected 1";
    throw DomainError(os.str());
  }
}

}  // namespace detail

bool Propensities::has_overlap() const { return min() > 0.0; }

double Propensities::min() const {
  return *std::min_element(probs().begin(), probs().end());
}

Vec uniform_probs(std::size_t n) {
  return Vec(n, 1.0 / static_cast<double>(n));
}

bool Dataset::has_valuations() const {
  return !records.empty() &&
         std::all_of(records.begin(), records.end(),
                     [](const ObservedRecord& r) { return r.valuation.has_value(); });
}

Dataset Dataset::subset(std::span<const std::size_t> idx) const {
  Dataset out{ladder, {}, {}};
  out.records.reserve(idx.size());
  out.logging.reserve(idx.size());
  for (std::size_t i : idx) {
    out.records.push_back(records.at(i));
    out.logging.push_back(logging.at(i));
  }
  return out;
}

std::size_t outcome_index(std::size_t price, bool sold, std::size_t m) {
  if (price >= m) {
    throw DomainError("price index " + std::to_string(price) +
                      " out of range for ladder of size " + std::to_string(m));
  }
  return sold ? price : m + price;
}

ValidationReport validate(const Dataset& data, double floor) {
  ValidationReport report;
  const std::size_t m = data.ladder.size();
  if (data.logging.size() != data.records.size()) {
    report.flags.push_back({0, FlagKind::kShape,
                            "propensity rows do not match record count"});
    return report;
  }
  for (std::size_t i = 0; i < data.records.size(); ++i) {
    const ObservedRecord& r = data.records[i];
    const Propensities& pi0 = data.logging[i];
    if (r.price >= m || pi0.size() != m) {
      report.flags.push_back({i, FlagKind::kShape,
                              "price index or propensity length out of range"});
      continue;
    }
    report.min_logged_propensity =
        std::min(report.min_logged_propensity, pi0[r.price]);
    if (pi0[r.price] < floor) {
      std::ostringstream os;
      os << "propensity " << pi0[r.price] << " at offered rung " << r.price
         << " below floor " << floor;
      report.flags.push_back({i, FlagKind::kOverlap, os.str()});
    }
    if (r.valuation) {
      if (*r.valuation > m) {
        report.flags.push_back({i, FlagKind::kShape, "valuation slot out of range"});
      } else if (r.sold != (r.price < *r.valuation)) {
        std::ostringstream os;
        os << "sold=" << r.sold << " at rung " << r.price
           << " contradicts valuation slot " << *r.valuation;
        report.flags.push_back({i, FlagKind::kConsistency, os.str()});
      }
    }
  }
  return report;
}

}  // namespace pricing
