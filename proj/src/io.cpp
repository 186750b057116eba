#include "pinning/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "pinning/errors.hpp"

namespace pinning {

std::string format_number(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::ordered_json json_number(double v) {
  if (std::isfinite(v)) return v;
  return format_number(v);
}

CsvTable::CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}

void CsvTable::add_row(std::vector<std::string> cells) {
  if (cells.size() != header_.size()) throw SizeError("csv row width does not match header");
  rows_.push_back(std::move(cells));
}

std::string CsvTable::str() const {
  std::string out;
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out += ',';
      out += cells[i];
    }
    out += '\n';
  };
  emit(header_);
  for (const auto& r : rows_) emit(r);
  return out;
}

nlohmann::ordered_json disorder_spec_to_json(const DisorderSpec& spec, std::uint64_t seed) {
  nlohmann::ordered_json params = nlohmann::ordered_json::object();
  if (spec.kind() == DisorderKind::table) {
    params["values"] = std::vector<double>(spec.values().begin(), spec.values().end());
    params["probs"] = std::vector<double>(spec.probs().begin(), spec.probs().end());
  }
  return {{"kind", std::string(to_string(spec.kind()))}, {"params", params}, {"seed", seed}};
}

DisorderSpec disorder_spec_from_json(const nlohmann::json& j, std::uint64_t* seed) {
  if (!j.is_object() || !j.contains("kind")) throw InvalidSpec("disorder spec JSON needs a \"kind\" field");
  const DisorderKind kind = disorder_kind_from_string(j.at("kind").get<std::string>());
  if (seed && j.contains("seed")) *seed = j.at("seed").get<std::uint64_t>();
  switch (kind) {
    case DisorderKind::scaled_rademacher:
      return DisorderSpec::scaled_rademacher();
    case DisorderKind::gaussian_unit:
      return DisorderSpec::gaussian_unit();
    case DisorderKind::table: {
      const auto& p = j.at("params");
      return DisorderSpec::table(p.at("values").get<std::vector<double>>(), p.at("probs").get<std::vector<double>>());
    }
  }
  throw InvalidSpec("unknown disorder kind");
}

namespace {

double to_double(std::string_view s) {
  std::string tmp(s);
  if (tmp == "inf" || tmp == "+inf") return kInf;
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tmp, &pos);
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + tmp + "'");
  }
  if (pos != tmp.size()) throw std::invalid_argument("not a number: '" + tmp + "'");
  return v;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (;;) {
    const std::size_t p = s.find(sep, start);
    out.push_back(s.substr(start, p == std::string_view::npos ? std::string_view::npos : p - start));
    if (p == std::string_view::npos) return out;
    start = p + 1;
  }
}

}  // namespace

DisorderSpec parse_disorder_spec(std::string_view text) {
  if (!text.empty() && text.front() == '{') return disorder_spec_from_json(nlohmann::json::parse(text));
  if (text == "scaled_rademacher" || text == "rademacher") return DisorderSpec::scaled_rademacher();
  if (text == "gaussian_unit" || text == "gaussian") return DisorderSpec::gaussian_unit();
  if (text.substr(0, 6) == "table:") {
    std::vector<double> values, probs;
    for (std::string_view atom : split(text.substr(6), ',')) {
      const auto parts = split(atom, ':');
      if (parts.size() != 2) throw InvalidSpec("table entries must be value:probability");
      values.push_back(to_double(parts[0]));
      probs.push_back(to_double(parts[1]));
    }
    return DisorderSpec::table(std::move(values), std::move(probs));
  }
  throw InvalidSpec("unknown disorder spec '" + std::string(text) + "'");
}

std::vector<double> parse_grid(std::string_view text) {
  if (text.empty()) throw std::invalid_argument("empty grid");
  const auto range = split(text, ':');
  if (range.size() == 3) {
    const double a = to_double(range[0]), b = to_double(range[1]);
    const double count = to_double(range[2]);
    if (!(count >= 1) || count != std::floor(count)) throw std::invalid_argument("grid count must be a positive integer");
    const long m = static_cast<long>(count);
    std::vector<double> out(static_cast<std::size_t>(m));
    for (long i = 0; i < m; ++i) out[i] = m == 1 ? a : a + (b - a) * static_cast<double>(i) / static_cast<double>(m - 1);
    return out;
  }
  if (range.size() != 1) throw std::invalid_argument("grid must be a list or start:stop:count");
  std::vector<double> out;
  for (std::string_view v : split(text, ',')) out.push_back(to_double(v));
  return out;
}

std::vector<long> parse_int_grid(std::string_view text) {
  std::vector<long> out;
  for (double v : parse_grid(text)) {
    if (v != std::floor(v) || !std::isfinite(v)) throw std::invalid_argument("integer grid has non-integer entries");
    out.push_back(static_cast<long>(v));
  }
  return out;
}

std::uint64_t fnv1a64(std::string_view bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace pinning
