#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "pinning/model.hpp"

namespace pinning {

/// %.17g for finite values, "inf", "-inf" and "nan" otherwise.
std::string format_number(double v);

/// JSON number, or the same sentinel strings for non-finite values.
nlohmann::ordered_json json_number(double v);

/// Comma-separated table with a fixed header; rows are appended in order.
class CsvTable {
 public:
  explicit CsvTable(std::vector<std::string> header);

  void add_row(std::vector<std::string> cells);
  std::size_t rows() const { return rows_.size(); }
  std::string str() const;

 private:
  std::vector<std::string> header_;
  std::vector<std::vector<std::string>> rows_;
};

/// {kind, params, seed}
nlohmann::ordered_json disorder_spec_to_json(const DisorderSpec& spec, std::uint64_t seed);
DisorderSpec disorder_spec_from_json(const nlohmann::json& j, std::uint64_t* seed = nullptr);

/**
 * Parses a disorder description: "scaled_rademacher" (or "rademacher"),
 * "gaussian_unit" (or "gaussian"), "table:v1:p1,v2:p2,..." or a JSON
 * object in the format of disorder_spec_to_json.
 */
DisorderSpec parse_disorder_spec(std::string_view text);

/// Grid syntax: "a,b,c" or "start:stop:count" (inclusive, evenly spaced).
std::vector<double> parse_grid(std::string_view text);
std::vector<long> parse_int_grid(std::string_view text);

/// 64-bit FNV-1a.
std::uint64_t fnv1a64(std::string_view bytes);
std::string hex64(std::uint64_t v);

}  // namespace pinning
