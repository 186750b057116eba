#include "pinning/renewal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinning/errors.hpp"

namespace pinning {

namespace {
constexpr std::size_t kBlock = 64;
constexpr double kNegInf = -std::numeric_limits<double>::infinity();
}  // namespace

double log_sum_exp(std::span<const double> x) {
  if (x.empty()) return kNegInf;
  const double mx = *std::max_element(x.begin(), x.end());
  if (std::isinf(mx)) return mx;
  // Neumaier-compensated sum: brute-force oracles add up to 2^20 terms.
  double acc = 0.0;
  double comp = 0.0;
  for (double v : x) {
    const double t = std::exp(v - mx);
    const double sum = acc + t;
    comp += std::abs(acc) >= t ? (acc - sum) + t : (t - sum) + acc;
    acc = sum;
  }
  return mx + std::log(acc + comp);
}

std::vector<double> renewal_log_partition(std::span<const double> kernel,
                                          std::span<const double> log_site_weight) {
  if (kernel.size() != log_site_weight.size() || kernel.empty())
    throw SizeError("renewal: kernel and site weights must both have length M + 1");
  const std::size_t m_max = kernel.size() - 1;

  // reversed kernel so that sum_k y[k] K[m - k] walks both arrays forward
  std::vector<double> krev(m_max + 1);
  for (std::size_t j = 0; j <= m_max; ++j) krev[j] = kernel[m_max - j];

  std::vector<double> log_z(m_max + 1, kNegInf);
  std::vector<double> mant(m_max + 1, 0.0);
  std::vector<double> block_max;
  block_max.reserve(m_max / kBlock + 1);
  log_z[0] = 0.0;
  double running_max = kNegInf;

  for (std::size_t m = 1; m <= m_max; ++m) {
    const std::size_t full = m / kBlock;  // blocks lying entirely in [0, m - 1]
    const std::size_t part_begin = full * kBlock;

    double ref = running_max;
    for (std::size_t k = part_begin; k < m; ++k) ref = std::max(ref, log_z[k]);

    // K[m - k] = krev[m_max - m + k]
    const double* kr = krev.data() + (m_max - m);
    double acc = 0.0;
    for (std::size_t b = 0; b < full; ++b) {
      const double scale = std::exp(block_max[b] - ref);
      if (scale == 0.0) continue;
      const std::size_t k0 = b * kBlock;
      const double* y = mant.data() + k0;
      const double* kk = kr + k0;
      double d0 = 0.0, d1 = 0.0, d2 = 0.0, d3 = 0.0;
      for (std::size_t i = 0; i < kBlock; i += 4) {
        d0 += y[i] * kk[i];
        d1 += y[i + 1] * kk[i + 1];
        d2 += y[i + 2] * kk[i + 2];
        d3 += y[i + 3] * kk[i + 3];
      }
      acc += scale * ((d0 + d1) + (d2 + d3));
    }
    for (std::size_t k = part_begin; k < m; ++k) acc += std::exp(log_z[k] - ref) * kr[k];

    log_z[m] = log_site_weight[m] + ref + std::log(acc);

    if ((m + 1) % kBlock == 0) {
      const std::size_t k0 = m + 1 - kBlock;
      double bm = kNegInf;
      for (std::size_t k = k0; k <= m; ++k) bm = std::max(bm, log_z[k]);
      for (std::size_t k = k0; k <= m; ++k) mant[k] = std::exp(log_z[k] - bm);
      block_max.push_back(bm);
      running_max = std::max(running_max, bm);
    }
  }
  return log_z;
}

}  // namespace pinning
