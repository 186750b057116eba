#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "pinning/model.hpp"

namespace pinning {

/**
 * Law of one excursion length on {2, 4, ..., T} plus an overflow atom for
 * everything longer than the horizon T.
 *
 * `probs[k]` is the mass of length 2k for k = 1..T/2 (entry 0 is 0) and
 * `survival[k]` is P(tau > 2k), with survival[0] = 1 and
 * survival[T/2] = overflow.
 */
struct ExcursionDistribution {
  std::vector<double> probs;
  std::vector<double> survival;
  double overflow = 0.0;

  long half_len() const { return static_cast<long>(probs.size()) - 1; }
  double total() const;
  /// sum_k 2k probs[k], the overflow atom excluded.
  double truncated_mean() const;
};

/**
 * Homogeneous tilted excursion law
 *
 *   P(tau = 2n) = (1 + e^{-4hn})/2 * alpha^{2n} P_srw(tau = 2n) * e^beta / H,
 *   H = e^beta (1 - (sqrt(1 - alpha^2) + sqrt(1 - e^{-4h} alpha^2)) / 2).
 *
 * e^beta cancels in the probabilities; it only enters H.
 */
struct TiltedLaw {
  double alpha = 1.0;
  double h = 0.0;
  double beta = 0.0;
  /// Closed-form H.
  double normalizer = 0.0;
  /// e^beta times the truncated series, i.e. H minus the part beyond T.
  double series_normalizer = 0.0;
  long trunc = 0;
  ExcursionDistribution dist;

  double p2() const { return dist.probs[1]; }
  double trunc_mass() const { return dist.overflow; }
  /// Analytic bound on H - series_normalizer.
  double remainder_bound() const;
};

/// Requires 0 < alpha <= 1 and an even trunc >= 2.
TiltedLaw hom_tilted_law(double alpha, double h, double beta, long trunc = kDefaultTrunc);

/// Mass at length 2 multiplied by (1 + alpha1), everything else by mu1.
struct TiltConstants {
  double alpha1 = 0.0;
  double c = 0.0;
  double sqrt_c = 0.0;
  /// 1 - c alpha1^2
  double alpha_sq = 1.0;
  double mu1 = 1.0;
};

/// One inequality the constants must satisfy; margin >= 0 means it holds.
struct Margin {
  std::string name;
  double margin = 0.0;
};

struct TiltMargins {
  std::vector<Margin> items;
  bool all_hold() const;
  /// Smallest margin, with its name.
  const Margin& weakest() const;
};

/// alpha1, c and alpha^2 = 1 - c alpha1^2. mu1 is left at 1: it needs P(2).
/// Requires s <= 1, beta s <= log 2, beta <= log 2 and h > 0.
TiltConstants tilt_alpha(double beta, double s, double h);

/**
 * Full constants for a law built at alpha = sqrt(1 - c alpha1^2).
 *
 * Checks P(2) in [1/8, 7/8], P(2)/(1 - P(2)) in [1/7, 7], alpha^2 >= 3/4,
 * sqrt(c) alpha1 <= 1/4, sqrt(c) alpha1 (1 + 1/(2 sqrt(1 - e^{-4h}))) <= 1/3,
 * 7 alpha1 < 1/3 and mu1 in (0, 1]. Throws DomainError naming the first
 * inequality that fails.
 */
TiltConstants tilt_constants(double beta, double s, double h, const TiltedLaw& law);

/// Margins of every inequality above (never throws on a failed margin).
TiltMargins tilt_margins(double h, const TiltedLaw& law, const TiltConstants& k);

struct TiltSetup {
  TiltedLaw law;
  TiltConstants constants;
  TiltMargins margins;
};

/// tilt_alpha, hom_tilted_law and tilt_constants in one go.
TiltSetup make_tilt(double beta, double s, double h, long trunc = kDefaultTrunc);

/**
 * Excursion law used after a contact when the reward two steps ahead is
 * zeta_next: unchanged for zeta_next <= 0, otherwise length 2 boosted by
 * (1 + alpha1) and all other lengths (overflow included) scaled by mu1.
 * The survival function is then exactly mu1 times the base one.
 */
ExcursionDistribution env_tilted_step(const TiltedLaw& law, const TiltConstants& k, double zeta_next);

/// Smallest k >= 1 with scale * survival[k] < u, or 0 for the overflow atom.
/// u in (0, 1]. This is inverse-CDF sampling on the survival function.
long draw_half_length(const std::vector<double>& survival, double u, double scale = 1.0);

/// iid excursion lengths (in steps) from `dist`; overflow draws are reported as -1.
std::vector<long> sample_excursions(const ExcursionDistribution& dist, long count, std::uint64_t seed);

/**
 * Contact times 0 < i_1 < ... < i_l <= n of the environment-tilted renewal:
 * from a contact at x the next length is drawn from env_tilted_step(zeta_{x+2}).
 * The walk stops at the first excursion that would pass n. Requires
 * law.trunc >= n, so an overflow draw always ends the walk, and
 * disorder.size() >= n.
 */
std::vector<long> sample_contacts(const TiltedLaw& law, const TiltConstants& k, const DisorderField& disorder,
                                  long n, std::uint64_t seed);

/// Monte Carlo estimate paired with a closed-form prediction evaluated on
/// the same runs.
struct PairedEstimate {
  double estimate = 0.0;
  double estimate_stderr = 0.0;
  double prediction = 0.0;
  double prediction_stderr = 0.0;
  /// Standard error of the per-replica difference estimate - prediction.
  double diff_stderr = 0.0;
  long replicas = 0;

  /// |estimate - prediction| <= k * diff_stderr (exact equality if both are 0).
  bool consistent(double k = 3.0) const;
};

struct TiltRunOptions {
  long n = 100000;
  long replicas = 200;
  std::uint64_t seed = 1;
  unsigned threads = 1;
};

/**
 * Energy term (beta s / N) E E[sum_j zeta_{i_j}] under the tilted renewal.
 *
 * Prediction: given a contact at x <= N - 2, the next contact lands at x + 2
 * with zeta_{x+2} tilted and elsewhere on a fresh centred variable, so
 *   E1 = (beta s / N) alpha1 P(2) E[zeta 1{zeta > 0}] E[C_N],
 * where C_N counts contacts in {0, ..., N - 2} (the origin included).
 */
PairedEstimate energy_term(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                           const TiltConstants& k, const TiltRunOptions& opt);

/**
 * Tilt cost S_N / N = (1/N) E E[sum_j log(P(tau_j) / P_zeta(tau_j))].
 *
 * Prediction, summed over contacts x <= N - 2:
 *   -(1/N) P(zeta > 0) [P(2)(1 + alpha1) log(1 + alpha1)
 *                       + mu1 log mu1 P(4 <= tau <= N - x)].
 */
PairedEstimate entropy_term(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                            const TiltConstants& k, const TiltRunOptions& opt);

struct TiltRunSummary {
  PairedEstimate e1;
  PairedEstimate e2;
  double contacts_per_step = 0.0;
  double contacts_per_step_stderr = 0.0;
};

/// Both estimators and l_N / N from a single set of runs.
TiltRunSummary run_tilted(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                          const TiltConstants& k, const TiltRunOptions& opt);

/// q(s) + log(e^beta (1 - sqrt(1 - e^{-4h}) / 2)). Positive exactly for h < h0(beta).
double min8_bracket(double beta, double s, double h);

struct BoundLedger {
  double beta = 0.0;
  double s = 0.0;
  double h = 0.0;
  double bracket = 0.0;
  bool bracket_positive = false;
  /// Smallest length N0 whose h-uniform tail bound is <= the target.
  long n0 = 0;
  double tail_at_n0 = 0.0;
  double target_tail = 0.0;
  std::optional<TiltRunSummary> mc;
};

/**
 * h-uniform bound on P(tau > N0) for the tilted law at this alpha:
 *   sum_{2n > N0} alpha^{2n} P_srw(2n) / ((1 - sqrt(1 - alpha^2)) / 2).
 */
double uniform_tail_bound(const TiltedLaw& law, long n0);

/**
 * Lower-bound bracket together with N0 for the given target tail (q(s) when
 * target_tail <= 0). Throws TruncationError carrying a sufficient horizon
 * when the target cannot be met within law.trunc, and DomainError when the
 * resulting target is 0 (s = 0).
 */
BoundLedger assemble_min8(double beta, double s, double h, const TiltedLaw& law, const TiltConstants& k,
                          double target_tail = 0.0);

struct DominanceReport {
  /// CDF_a >= CDF_b everywhere (a has shorter excursions).
  bool dominates = false;
  /// a >= b up to crossing_index, a <= b after it.
  bool single_crossing = false;
  std::optional<long> crossing_index;
  /// max_k (CDF_b(k) - CDF_a(k)); <= 0 when a dominates exactly.
  double max_cdf_violation = 0.0;
};

inline constexpr double kDominanceTol = 1e-13;

/// Both laws must share the horizon. The overflow atom is compared as the
/// last support point.
DominanceReport dominance_check(const ExcursionDistribution& a, const ExcursionDistribution& b,
                                double tol = kDominanceTol);

struct OrderingEstimate {
  double tilted = 0.0;
  double tilted_stderr = 0.0;
  double hom = 0.0;
  double hom_stderr = 0.0;
  double untilted = 0.0;
  double untilted_stderr = 0.0;
  long draws = 0;
  /// Draws where l(tilted) >= l(hom) >= l(alpha, inf, 0) failed.
  long violations = 0;
};

/**
 * E E[l_N / N] under the tilted renewal, the homogeneous law P_{alpha,h}^beta
 * and P_{alpha,inf}^0, from coupled draws: the j-th excursion of all three
 * chains uses the same uniform. Throws DomainError if either dominance
 * precondition fails. Each draw uses a fresh disorder replica.
 */
OrderingEstimate expected_contacts_ordering(const ModelParams& params, const DisorderSpec& spec,
                                            const TiltedLaw& law, const TiltConstants& k,
                                            const TiltRunOptions& opt);

}  // namespace pinning
