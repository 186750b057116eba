#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pinning {

inline constexpr double kLog2 = 0.69314718055994530942;
inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Pinning strength beta, repulsion/asymmetry h and disorder amplitude s.
/// h may be +inf: the excursions below the interface are then suppressed
/// exactly (exp(-4 h n) is substituted by 0, never by a large float).
struct ModelParams {
  double beta = 0.0;
  double h = 0.0;
  double s = 0.0;

  /// Throws DomainError unless beta, h, s are all >= 0 (and not NaN).
  void validate() const;
};

/// exp(-c * h * n) with the h = +inf limit taken analytically.
inline double repulsion_factor(double h, double c_times_n) {
  if (std::isinf(h)) return c_times_n > 0.0 ? 0.0 : 1.0;
  return std::exp(-h * c_times_n);
}

enum class DisorderKind { scaled_rademacher, gaussian_unit, table };

std::string_view to_string(DisorderKind kind);
DisorderKind disorder_kind_from_string(std::string_view name);

/**
 * Law of a single disorder variable zeta.
 *
 * The built-in kinds are exactly centred. `scaled_rademacher` (zeta = +-2 with
 * probability 1/2) has P(zeta > 0) = 1/2 and E[zeta 1{zeta > 0}] = 1, which are
 * the hypotheses under which the explicit tilt constants hold.
 */
class DisorderSpec {
 public:
  DisorderSpec() = default;
  static DisorderSpec scaled_rademacher();
  static DisorderSpec gaussian_unit();
  /// Finite support law. Probabilities are normalised; the normalised law must
  /// have |mean| < 1e-12, otherwise InvalidSpec is thrown.
  static DisorderSpec table(std::vector<double> values, std::vector<double> probs);

  DisorderKind kind() const { return kind_; }
  std::span<const double> values() const { return values_; }
  std::span<const double> probs() const { return probs_; }

  double mean() const;
  double variance() const;
  /// log E exp(lambda zeta). Always finite.
  double cumulant(double lambda) const;
  double prob_positive() const;
  /// E[zeta 1{zeta > 0}]
  double positive_part_mean() const;

  /// One draw from the counter-based stream (key, index). Pure.
  double sample(std::uint64_t key, std::uint64_t index) const;

  bool operator==(const DisorderSpec&) const = default;

 private:
  DisorderKind kind_ = DisorderKind::scaled_rademacher;
  std::vector<double> values_;
  std::vector<double> probs_;
  std::vector<double> cdf_;
};

/// A realised environment zeta_1..zeta_N. `values[i - 1]` holds zeta_i.
struct DisorderField {
  std::vector<double> values;
  DisorderSpec spec;
  std::uint64_t seed = 0;

  std::size_t size() const { return values.size(); }
  /// zeta_i with the 1-based site index used throughout the model.
  double at(std::size_t site) const { return values[site - 1]; }
};

/// iid field of length n; bit-identical for equal (spec, n, seed).
DisorderField make_disorder(const DisorderSpec& spec, std::size_t n, std::uint64_t seed);

/// Constant field, handy for s = 0 runs and tests.
DisorderField constant_disorder(std::size_t n, double value = 0.0);

// ---------------------------------------------------------------------------
// Simple random walk excursion kernel
// ---------------------------------------------------------------------------

/// log P(tau > 2n) = log( C(2n, n) / 4^n ).
double log_return_tail(long n);

/// P(tau > 2n), the probability that the walk avoids 0 during 2n steps.
double return_tail(long n);

/// P(tau = 2n), first return of the simple random walk at time 2n. n >= 1.
double return_prob(long n);

/// log P(tau = 2n). n >= 1.
double log_return_prob(long n);

/// Sign-averaged excursion weight V_{h,l} = P(tau = 2l) (1 + exp(-4 h l)) / 2.
double excursion_weight(double h, long l);

/**
 * First-return law truncated at an even horizon T.
 *
 * `return_probs[n]` is P(tau = 2n) for n = 1..T/2 (index 0 unused, set to 0)
 * and `tail[n]` is P(tau > 2n) for n = 0..T/2.
 */
struct WalkKernel {
  long max_len = 0;
  std::vector<double> return_probs;
  std::vector<double> tail;

  explicit WalkKernel(long max_len);

  long half_len() const { return max_len / 2; }
  /// sum_{n <= T/2} P(tau = 2n) z^{2n}
  double generating_function(double z) const;
  /// Upper bound on the part of the series beyond the horizon.
  double remainder_bound(double z) const;
};

inline constexpr long kDefaultTrunc = 200000;

}  // namespace pinning
