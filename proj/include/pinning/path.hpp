#pragma once

#include <vector>

#include "pinning/model.hpp"

namespace pinning {

/// Height-resolved recursions are O(n^2); larger sizes are refused.
inline constexpr long kPathMaxN = 5000;

/// Law of S_n under the polymer measure (free endpoint).
struct EndpointLaw {
  long n = 0;
  /// probs[j + n] = P(S_n = j), j = -n..n
  std::vector<double> probs;
  /// log of the path average of the Boltzmann weight, i.e. log Z_n
  double log_z = 0.0;

  double at(long height) const;
  double total() const;
};

/**
 * Forward recursion over (height, last sign at zero). Each step has
 * probability 1/2; arriving at 0 at time i multiplies by e^{beta(1 + s zeta_i)}
 * and every step with Lambda_i = -1 (also at a zero reached from below)
 * multiplies by e^{-2h}. Lambda_0 = +1. n <= kPathMaxN.
 */
EndpointLaw endpoint_distribution(const ModelParams& params, const DisorderField& disorder, long n);

/// log Z_n read off the height-resolved recursion.
double path_log_partition(const ModelParams& params, const DisorderField& disorder, long n);

struct TailProfile {
  std::vector<long> levels;
  /// P(|S_n| > L)
  std::vector<double> tails;
  std::vector<double> log_tails;
  /// Least-squares fit log tail ~ intercept + slope L over levels with tail > 0.
  double slope = 0.0;
  double intercept = 0.0;
  long fitted_points = 0;
};

TailProfile tail_decay_profile(const ModelParams& params, const DisorderField& disorder, long n,
                               const std::vector<long>& levels);

/// E[#{1 <= i <= n : S_i > k} / n] under the polymer measure.
double above_level_fraction(const ModelParams& params, const DisorderField& disorder, long n, long k);

}  // namespace pinning
