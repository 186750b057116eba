#pragma once

#include <span>
#include <vector>

namespace pinning {

/**
 * Log-space renewal convolution
 *
 *   Z(0) = 1,   Z(m) = exp(w(m)) * sum_{l=1}^{m} Z(m - l) K(l),   m = 1..M.
 *
 * `kernel[l]` holds K(l) > 0 for l = 1..M (entry 0 ignored) and
 * `log_site_weight[m]` holds w(m) for m = 1..M (entry 0 ignored). Returns
 * log Z(0..M).
 *
 * Past values are kept in blocks of fixed width, each stored as a linear
 * mantissa relative to the block maximum. Every term of the sum is then a
 * multiply-add, with one exp per block, and nothing overflows regardless of
 * how far log Z drifts. Cost is M^2 / 2 multiply-adds.
 */
std::vector<double> renewal_log_partition(std::span<const double> kernel,
                                          std::span<const double> log_site_weight);

/// log(sum exp(x)) over a span; -inf for an empty span.
double log_sum_exp(std::span<const double> x);

}  // namespace pinning
