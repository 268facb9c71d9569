// Logged-data CSV files.
//
// Header: x_0..x_{d-1},price_index,sold[,valuation_index][,pi_1..pi_m]
// price_index is 1-based, sold is 0/1, valuation_index is 0..m. Without the
// pi_* columns every row uses the propensity vector passed by the caller.

#ifndef PRICING_DATASET_IO_HPP_
#define PRICING_DATASET_IO_HPP_

#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>

#include "pricing/ladder.hpp"

namespace pricing {

// Schema violation; the message names the line and column.
class SchemaError : public std::runtime_error {
 public:
  SchemaError(std::size_t line, const std::string& column, const std::string& what);
  std::size_t line() const { return line_; }
  const std::string& column() const { return column_; }

 private:
  std::size_t line_;
  std::string column_;
};

Dataset read_dataset_csv(std::istream& in, const PriceLadder& ladder,
                         const std::optional<Propensities>& constant_propensities = {});
Dataset read_dataset_csv_file(const std::string& path, const PriceLadder& ladder,
                              const std::optional<Propensities>& constant_propensities = {});

// Writes valuation_index when every record has one, and always the pi_*
// columns. Doubles are printed with round-trip precision.
void write_dataset_csv(std::ostream& out, const Dataset& data);

}  // namespace pricing

#endif  // PRICING_DATASET_IO_HPP_
