#include "pinning/model.hpp"

#include <algorithm>
#include <numbers>
#include <numeric>

#include "pinning/errors.hpp"
#include "pinning/rng.hpp"

namespace pinning {

void ModelParams::validate() const {
  if (!(beta >= 0.0) || !(h >= 0.0) || !(s >= 0.0))
    throw DomainError("model parameters must satisfy beta >= 0, h >= 0, s >= 0");
}

std::string_view to_string(DisorderKind kind) {
  switch (kind) {
    case DisorderKind::scaled_rademacher: return "scaled_rademacher";
    case DisorderKind::gaussian_unit: return "gaussian_unit";
    case DisorderKind::table: return "table";
  }
  return "unknown";
}

DisorderKind disorder_kind_from_string(std::string_view name) {
  if (name == "scaled_rademacher" || name == "rademacher") return DisorderKind::scaled_rademacher;
  if (name == "gaussian_unit" || name == "gaussian") return DisorderKind::gaussian_unit;
  if (name == "table") return DisorderKind::table;
  throw InvalidSpec("unknown disorder kind: " + std::string(name));
}

DisorderSpec DisorderSpec::scaled_rademacher() {
  DisorderSpec d;
  d.kind_ = DisorderKind::scaled_rademacher;
  return d;
}

DisorderSpec DisorderSpec::gaussian_unit() {
  DisorderSpec d;
  d.kind_ = DisorderKind::gaussian_unit;
  return d;
}

DisorderSpec DisorderSpec::table(std::vector<double> values, std::vector<double> probs) {
  if (values.empty() || values.size() != probs.size())
    throw InvalidSpec("table disorder needs matching, non-empty values and probs");
  double total = 0.0;
  for (double p : probs) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw InvalidSpec("table probabilities must be finite and >= 0");
    total += p;
  }
  if (!(total > 0.0)) throw InvalidSpec("table probabilities sum to zero");
  for (double v : values)
    if (!std::isfinite(v)) throw InvalidSpec("table values must be finite");

  DisorderSpec d;
  d.kind_ = DisorderKind::table;
  d.values_ = std::move(values);
  d.probs_ = std::move(probs);
  for (double& p : d.probs_) p /= total;
  if (std::abs(d.mean()) >= 1e-12) throw InvalidSpec("table disorder must be centred (|mean| < 1e-12)");
  d.cdf_.resize(d.probs_.size());
  std::partial_sum(d.probs_.begin(), d.probs_.end(), d.cdf_.begin());
  d.cdf_.back() = 1.0;
  return d;
}

double DisorderSpec::mean() const {
  if (kind_ != DisorderKind::table) return 0.0;
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) m += values_[i] * probs_[i];
  return m;
}

double DisorderSpec::variance() const {
  switch (kind_) {
    case DisorderKind::scaled_rademacher: return 4.0;
    case DisorderKind::gaussian_unit: return 1.0;
    case DisorderKind::table: break;
  }
  const double m = mean();
  double v = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i) v += (values_[i] - m) * (values_[i] - m) * probs_[i];
  return v;
}

double DisorderSpec::cumulant(double lambda) const {
  switch (kind_) {
    case DisorderKind::scaled_rademacher: {
      // log cosh(2 lambda), written to stay finite for large |lambda|
      const double a = std::abs(2.0 * lambda);
      return a + std::log1p(std::exp(-2.0 * a)) - kLog2;
    }
    case DisorderKind::gaussian_unit: return 0.5 * lambda * lambda;
    case DisorderKind::table: break;
  }
  double mx = -kInf;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (probs_[i] > 0.0) mx = std::max(mx, lambda * values_[i]);
  double acc = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (probs_[i] > 0.0) acc += probs_[i] * std::exp(lambda * values_[i] - mx);
  return mx + std::log(acc);
}

double DisorderSpec::prob_positive() const {
  if (kind_ != DisorderKind::table) return 0.5;
  double p = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] > 0.0) p += probs_[i];
  return p;
}

double DisorderSpec::positive_part_mean() const {
  switch (kind_) {
    case DisorderKind::scaled_rademacher: return 1.0;
    case DisorderKind::gaussian_unit: return 1.0 / std::sqrt(2.0 * std::numbers::pi);
    case DisorderKind::table: break;
  }
  double m = 0.0;
  for (std::size_t i = 0; i < values_.size(); ++i)
    if (values_[i] > 0.0) m += values_[i] * probs_[i];
  return m;
}

double DisorderSpec::sample(std::uint64_t key, std::uint64_t index) const {
  switch (kind_) {
    case DisorderKind::scaled_rademacher:
      return (CounterRng::at(key, index) >> 63) ? 2.0 : -2.0;
    case DisorderKind::gaussian_unit: {
      // Box-Muller on the counter pair (2i, 2i+1)
      const double u1 = 1.0 - CounterRng::uniform_at(key, 2 * index);
      const double u2 = CounterRng::uniform_at(key, 2 * index + 1);
      return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
    }
    case DisorderKind::table: break;
  }
  const double u = CounterRng::uniform_at(key, index);
  const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
  const auto pos = std::min<std::size_t>(static_cast<std::size_t>(it - cdf_.begin()), values_.size() - 1);
  return values_[pos];
}

DisorderField make_disorder(const DisorderSpec& spec, std::size_t n, std::uint64_t seed) {
  if (n == 0) throw SizeError("disorder length must be >= 1");
  DisorderField field;
  field.spec = spec;
  field.seed = seed;
  field.values.resize(n);
  const std::uint64_t key = mix64(seed);
  for (std::size_t i = 0; i < n; ++i) field.values[i] = spec.sample(key, i);
  return field;
}

DisorderField constant_disorder(std::size_t n, double value) {
  DisorderField field;
  field.values.assign(n, value);
  return field;
}

// ---------------------------------------------------------------------------

namespace {

// Below this index the tail is built by the exact product recurrence; above it
// the Stirling expansion of log(Gamma(2n+1) / Gamma(n+1)^2) - 2n log 2 is
// accurate to a few ulps.
constexpr long kSeriesStart = 40;

double log_tail_recurrence(long n) {
  double u = 1.0;
  for (long k = 1; k <= n; ++k) u *= static_cast<double>(2 * k - 1) / static_cast<double>(2 * k);
  return std::log(u);
}

double log_tail_series(long n) {
  const double x = static_cast<double>(n);
  const double i1 = 1.0 / x;
  const double i2 = i1 * i1;
  const double corr =
      i1 * (-1.0 / 8.0 + i2 * (1.0 / 192.0 + i2 * (-1.0 / 640.0 + i2 * (17.0 / 14336.0 + i2 * (-1023.0 / 608256.0)))));
  return -0.5 * std::log(std::numbers::pi * x) + corr;
}

}  // namespace

double log_return_tail(long n) {
  if (n < 0) throw DomainError("return_tail: n must be >= 0");
  if (n == 0) return 0.0;
  return n < kSeriesStart ? log_tail_recurrence(n) : log_tail_series(n);
}

double return_tail(long n) { return std::exp(log_return_tail(n)); }

double log_return_prob(long n) {
  if (n < 1) throw DomainError("return_prob: n must be >= 1");
  return log_return_tail(n) - std::log(static_cast<double>(2 * n - 1));
}

double return_prob(long n) { return std::exp(log_return_prob(n)); }

double excursion_weight(double h, long l) {
  return return_prob(l) * 0.5 * (1.0 + repulsion_factor(h, 4.0 * static_cast<double>(l)));
}

WalkKernel::WalkKernel(long max_len_in) : max_len(max_len_in) {
  if (max_len < 2 || max_len % 2 != 0) throw SizeError("walk kernel horizon must be even and >= 2");
  const long m = half_len();
  return_probs.assign(static_cast<std::size_t>(m + 1), 0.0);
  tail.assign(static_cast<std::size_t>(m + 1), 1.0);
  for (long n = 1; n <= m; ++n) {
    const double lt = log_return_tail(n);
    tail[n] = std::exp(lt);
    return_probs[n] = std::exp(lt - std::log(static_cast<double>(2 * n - 1)));
  }
}

double WalkKernel::generating_function(double z) const {
  const double z2 = z * z;
  // Horner from the far end keeps the small terms first.
  double acc = 0.0;
  for (long n = half_len(); n >= 1; --n) acc = (acc + return_probs[n]) * z2;
  return acc;
}

double WalkKernel::remainder_bound(double z) const {
  // sum_{n > T/2} P(tau = 2n) z^{2n} <= z^{T+2} P(tau > T)
  return std::pow(z, static_cast<double>(max_len + 2)) * tail[half_len()];
}

}  // namespace pinning
