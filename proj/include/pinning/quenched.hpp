#pragma once

#include <cstdint>
#include <vector>

#include "pinning/model.hpp"

namespace pinning {

/// Exact finite-size partition data for one disorder realisation.
struct PartitionTrace {
  long n = 0;
  /// log Z^c(2k), k = 0..n/2: walks with S_{2k} = 0. log_zc[0] = 0.
  std::vector<double> log_zc;
  /// log Z_n with free endpoint.
  double log_zf = 0.0;
  /// E[l_n] under the constrained polymer measure of size n.
  double contact_expectation = 0.0;
  ModelParams params;
  std::uint64_t disorder_seed = 0;
};

/// K(l) = V_{h,l} for l = 0..m (entry 0 is 0).
std::vector<double> sign_averaged_kernel(double h, long m);

/// beta (1 + s zeta_{2k}) for k = 0..m (entry 0 is 0).
std::vector<double> contact_log_rewards(const ModelParams& params, const DisorderField& disorder, long m);

/// log Z^c(2k) for k = 0..m via the renewal recursion over excursions.
std::vector<double> constrained_log_partitions(const ModelParams& params, const DisorderField& disorder, long m);

/// Free-endpoint log Z_n from the constrained values at all even times <= n.
/// The last, unfinished excursion contributes (1 + e^{-2h(n-j)})/2 P(tau > n-j).
double free_from_constrained(const std::vector<double>& log_zc, double h, long n);

/// Full trace at even n: forward constrained values, free value and, when
/// `with_contacts`, the expected number of contacts under the constrained measure.
PartitionTrace partition_constrained(const ModelParams& params, const DisorderField& disorder, long n,
                                     bool with_contacts = true);

/// log Z_n with free endpoint. Any n >= 1.
double partition_free(const ModelParams& params, const DisorderField& disorder, long n);

/// Direct evaluation over all 2^n paths of
///   beta sum (1 + s zeta_i) 1{S_i = 0} - 2h sum Delta_i,
/// returning the log of the path average. n <= 20.
double brute_force_partition(const ModelParams& params, const DisorderField& disorder, long n);

inline constexpr long kBruteForceMaxN = 20;

/// Contact marginals of the constrained polymer measure of size n (even).
struct ContactProfile {
  /// P(S_{2k} = 0), k = 0..n/2 (entry 0 is 1).
  std::vector<double> marginals;
  double expected_contacts = 0.0;
  double log_z = 0.0;
};

ContactProfile contact_profile(const ModelParams& params, const DisorderField& disorder, long n);

/// E[l_n] / n under the constrained polymer measure, in [0, 1/2].
double contact_fraction(const ModelParams& params, const DisorderField& disorder, long n);

enum class FreeEnergyMode { constrained, free };

struct FreeEnergyEstimate {
  double mean = 0.0;
  double std_err = 0.0;
  long n = 0;
  long replicas = 0;
  FreeEnergyMode mode = FreeEnergyMode::free;
};

/// Seed of disorder replica r in a sweep seeded by `seed`.
std::uint64_t replica_seed(std::uint64_t seed, long r);

/// (1/n) log Z_n averaged over iid disorder replicas.
FreeEnergyEstimate free_energy_quenched(const ModelParams& params, const DisorderSpec& spec, long n, long replicas,
                                        std::uint64_t seed, FreeEnergyMode mode = FreeEnergyMode::free,
                                        unsigned threads = 1);

/// (1/n) log E Z_n: the homogeneous recursion at reward annealed_exponent(beta, s).
double free_energy_annealed(const ModelParams& params, const DisorderSpec& spec, long n,
                            FreeEnergyMode mode = FreeEnergyMode::free);

/// (1/n) log Z_n of the homogeneous model (s = 0).
double free_energy_hom_finite(double beta, double h, long n, FreeEnergyMode mode = FreeEnergyMode::free);

/// Replica mean of contact_fraction.
double mean_contact_fraction(const ModelParams& params, const DisorderSpec& spec, long n, long replicas,
                             std::uint64_t seed, unsigned threads = 1);

struct CriticalBracket {
  double h_lo = 0.0;
  double h_hi = 0.0;
  /// Bracket before the [hc0 - eps, h_ann + eps] sanity clamp.
  double raw_h_lo = 0.0;
  double raw_h_hi = 0.0;
  /// Set when the detector was not monotone or the bracket had to be clamped.
  bool low_confidence = false;
  bool clamped = false;
  /// hc0 = +inf: the detector reports localization for every h.
  bool divergent = false;
  int evaluations = 0;
};

struct BracketOptions {
  long n = 100000;
  long replicas = 1;
  double threshold = 1e-3;
  std::uint64_t seed = 1;
  double h_tol = 1e-4;
  /// Half-width of the sanity band [hc0 - eps, h_ann + eps].
  double clamp_eps = 1e-3;
  unsigned threads = 1;
};

/**
 * Numerical bracket [h_lo, h_hi] for the quenched critical point at size n.
 *
 * h_hi is the largest h at which the replica-averaged contact fraction exceeds
 * `threshold` (bisection on [0, h_ann + 1]). At finite n the contact fraction
 * at criticality is of order n^{-1/2}, so this crossing sits on the
 * delocalized side whenever threshold < c / sqrt(n).
 *
 * h_lo is the largest h at which localization is certified:
 * mean (1/n) log Z^c_n - 3 stderr > 0. Superadditivity of the constrained
 * partition function gives Phi >= (1/n) E log Z^c_n, so certified points
 * satisfy h < h_c.
 *
 * Non-monotone detector readings near h_hi widen the bracket and set
 * low_confidence; reported values are clamped into [hc0 - eps, h_ann + eps]
 * with `clamped` set when that changes anything. threshold <= 0 throws.
 */
CriticalBracket bracket_critical_h(double beta, double s, const DisorderSpec& spec, const BracketOptions& opt);

}  // namespace pinning
