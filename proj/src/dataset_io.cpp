#include "pricing/dataset_io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <vector>

namespace pricing {
namespace {

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    while (!cell.empty() && (cell.back() == '\r' || cell.back() == ' ')) cell.pop_back();
    while (!cell.empty() && cell.front() == ' ') cell.erase(cell.begin());
    out.push_back(cell);
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, const std::string& col) {
  double v = 0.0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
    throw SchemaError(line, col, "expected a finite number, got '" + s + "'");
  }
  return v;
}

long parse_int(const std::string& s, std::size_t line, const std::string& col) {
  long v = 0;
  const auto* end = s.data() + s.size();
  const auto [ptr, ec] = std::from_chars(s.data(), end, v);
  if (s.empty() || ec != std::errc() || ptr != end) {
    throw SchemaError(line, col, "expected an integer, got '" + s + "'");
  }
  return v;
}

std::string fmt(double v) {
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

SchemaError::SchemaError(std::size_t line, const std::string& column, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ", column '" + column +
                         "': " + what),
      line_(line),
      column_(column) {}

Dataset read_dataset_csv(std::istream& in, const PriceLadder& ladder,
                         const std::optional<Propensities>& constant_propensities) {
  const std::size_t m = ladder.size();
  std::string line;
  if (!std::getline(in, line)) throw SchemaError(1, "", "empty file");
  const std::vector<std::string> header = split_line(line);

  std::size_t d = 0;
  while (d < header.size() && header[d] == "x_" + std::to_string(d)) ++d;
  std::size_t col = d;
  auto expect = [&](const std::string& name) {
    if (col >= header.size() || header[col] != name) {
      throw SchemaError(1, col < header.size() ? header[col] : "<missing>",
                        "expected header column '" + name + "'");
    }
    ++col;
  };
  expect("price_index");
  expect("sold");
  bool has_valuation = false;
  if (col < header.size() && header[col] == "valuation_index") {
    has_valuation = true;
    ++col;
  }
  bool has_pi = false;
  if (col < header.size()) {
    for (std::size_t j = 1; j <= m; ++j) expect("pi_" + std::to_string(j));
    has_pi = true;
  }
  if (col != header.size()) {
    throw SchemaError(1, header[col], "unexpected column");
  }
  if (!has_pi && !constant_propensities) {
    throw SchemaError(1, "pi_1", "no propensity columns and no constant propensities given");
  }
  if (constant_propensities && constant_propensities->size() != m) {
    throw DomainError("constant propensities do not match the ladder");
  }

  Dataset data{ladder, {}, {}};
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    const std::vector<std::string> cells = split_line(line);
    if (cells.size() != header.size()) {
      throw SchemaError(line_no, cells.size() < header.size() ? header[cells.size()] : "<extra>",
                        "expected " + std::to_string(header.size()) + " fields, got " +
                            std::to_string(cells.size()));
    }
    ObservedRecord rec;
    rec.features.resize(d);
    for (std::size_t k = 0; k < d; ++k) rec.features[k] = parse_double(cells[k], line_no, header[k]);
    const long price = parse_int(cells[d], line_no, "price_index");
    if (price < 1 || static_cast<std::size_t>(price) > m) {
      throw SchemaError(line_no, "price_index",
                        "must be in 1.." + std::to_string(m) + ", got " + cells[d]);
    }
    rec.price = static_cast<std::size_t>(price - 1);
    const long sold = parse_int(cells[d + 1], line_no, "sold");
    if (sold != 0 && sold != 1) throw SchemaError(line_no, "sold", "must be 0 or 1");
    rec.sold = sold == 1;
    std::size_t next = d + 2;
    if (has_valuation) {
      const long v = parse_int(cells[next], line_no, "valuation_index");
      if (v < 0 || static_cast<std::size_t>(v) > m) {
        throw SchemaError(line_no, "valuation_index", "must be in 0.." + std::to_string(m));
      }
      rec.valuation = static_cast<std::size_t>(v);
      ++next;
    }
    if (has_pi) {
      Vec pi(m);
      for (std::size_t j = 0; j < m; ++j) {
        pi[j] = parse_double(cells[next + j], line_no, header[next + j]);
      }
      try {
        data.logging.emplace_back(std::move(pi));
      } catch (const DomainError& e) {
        throw SchemaError(line_no, "pi_1", e.what());
      }
    } else {
      data.logging.push_back(*constant_propensities);
    }
    data.records.push_back(std::move(rec));
  }
  return data;
}

Dataset read_dataset_csv_file(const std::string& path, const PriceLadder& ladder,
                              const std::optional<Propensities>& constant_propensities) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return read_dataset_csv(in, ladder, constant_propensities);
}

void write_dataset_csv(std::ostream& out, const Dataset& data) {
  const std::size_t d = data.feature_dim();
  const std::size_t m = data.ladder.size();
  const bool with_valuation = data.has_valuations();
  for (std::size_t k = 0; k < d; ++k) out << "x_" << k << ',';
  out << "price_index,sold";
  if (with_valuation) out << ",valuation_index";
  for (std::size_t j = 1; j <= m; ++j) out << ",pi_" << j;
  out << '\n';
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& r = data.records[i];
    for (double x : r.features) out << fmt(x) << ',';
    out << r.price + 1 << ',' << (r.sold ? 1 : 0);
    if (with_valuation) out << ',' << *r.valuation;
    for (double p : data.logging[i].probs()) out << ',' << fmt(p);
    out << '\n';
  }
}

}  // namespace pricing
