#include "pinning/path.hpp"

#include <algorithm>
#include <cmath>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

/**
 * Weights over states at time i:
 *   pos[j], neg[j] for heights +j, -j (j = 1..n + 1, last slot a zero pad),
 *   zp, zm for height 0 reached from above / below.
 * An optional second layer carries weight * (number of times above k).
 */
struct Layer {
  std::vector<double> pos, neg;
  double zp = 0.0, zm = 0.0;

  explicit Layer(long n) : pos(static_cast<std::size_t>(n + 2), 0.0), neg(static_cast<std::size_t>(n + 2), 0.0) {}

  void step(long i, const Layer& prev, double zero_weight, double below_weight) {
    const long top = std::min<long>(i, static_cast<long>(pos.size()) - 2);
    const double from_zero = prev.zp + prev.zm;
    pos[1] = 0.5 * (prev.pos[2] + from_zero);
    neg[1] = 0.5 * (prev.neg[2] + from_zero) * below_weight;
    for (long j = 2; j <= top; ++j) {
      pos[j] = 0.5 * (prev.pos[j - 1] + prev.pos[j + 1]);
      neg[j] = 0.5 * (prev.neg[j - 1] + prev.neg[j + 1]) * below_weight;
    }
    zp = 0.5 * prev.pos[1] * zero_weight;
    zm = 0.5 * prev.neg[1] * zero_weight * below_weight;
  }

  double sum(long top) const {
    double acc = zp + zm;
    for (long j = 1; j <= top; ++j) acc += pos[j] + neg[j];
    return acc;
  }

  void scale(long top, double f) {
    zp *= f;
    zm *= f;
    for (long j = 1; j <= top; ++j) {
      pos[j] *= f;
      neg[j] *= f;
    }
  }
};

void check_path_args(const ModelParams& params, const DisorderField& disorder, long n) {
  params.validate();
  if (n < 1) throw SizeError("path recursion: n must be >= 1");
  if (n > kPathMaxN) throw SizeError("path recursion: n above the O(n^2) cap of 5000");
  if (static_cast<long>(disorder.size()) < n) throw SizeError("path recursion: disorder shorter than n");
}

double zero_reward(const ModelParams& params, const DisorderField& disorder, long i) {
  const double z = params.s == 0.0 ? 0.0 : disorder.at(static_cast<std::size_t>(i));
  return std::exp(params.beta * (1.0 + params.s * z));
}

// Runs the recursion; if `level` is given also propagates the counting layer
// and returns the expected fraction of time above it through `above`.
EndpointLaw forward(const ModelParams& params, const DisorderField& disorder, long n, const long* level,
                    double* above) {
  check_path_args(params, disorder, n);
  const double below_weight = repulsion_factor(params.h, 2.0);
  Layer a(n), a_next(n), b(n), b_next(n);
  a.zp = 1.0;
  double log_scale = 0.0;
  for (long i = 1; i <= n; ++i) {
    const double w0 = zero_reward(params, disorder, i);
    const long top = std::min(i, n);
    a_next.step(i, a, w0, below_weight);
    if (level) {
      b_next.step(i, b, w0, below_weight);
      const long k = *level;
      // heights strictly above k gain one count
      if (0 > k) {
        b_next.zp += a_next.zp;
        b_next.zm += a_next.zm;
      }
      for (long j = 1; j <= top; ++j) {
        if (j > k) b_next.pos[j] += a_next.pos[j];
        if (-j > k) b_next.neg[j] += a_next.neg[j];
      }
    }
    const double total = a_next.sum(top);
    if (!(total > 0.0)) throw DomainError("path recursion: all weight vanished");
    a_next.scale(top, 1.0 / total);
    if (level) b_next.scale(top, 1.0 / total);
    log_scale += std::log(total);
    std::swap(a, a_next);
    if (level) std::swap(b, b_next);
  }

  EndpointLaw law;
  law.n = n;
  law.log_z = log_scale;
  law.probs.assign(static_cast<std::size_t>(2 * n + 1), 0.0);
  law.probs[n] = a.zp + a.zm;
  for (long j = 1; j <= n; ++j) {
    law.probs[n + j] = a.pos[j];
    law.probs[n - j] = a.neg[j];
  }
  if (level && above) *above = b.sum(n) / static_cast<double>(n);
  return law;
}

}  // namespace

double EndpointLaw::at(long height) const {
  if (height < -n || height > n) return 0.0;
  return probs[static_cast<std::size_t>(height + n)];
}

double EndpointLaw::total() const {
  double acc = 0.0;
  for (double p : probs) acc += p;
  return acc;
}

EndpointLaw endpoint_distribution(const ModelParams& params, const DisorderField& disorder, long n) {
  return forward(params, disorder, n, nullptr, nullptr);
}

double path_log_partition(const ModelParams& params, const DisorderField& disorder, long n) {
  return endpoint_distribution(params, disorder, n).log_z;
}

TailProfile tail_decay_profile(const ModelParams& params, const DisorderField& disorder, long n,
                               const std::vector<long>& levels) {
  const EndpointLaw law = endpoint_distribution(params, disorder, n);
  TailProfile t;
  t.levels = levels;
  // cumulative mass of |S_n| > L, summed from the outside in
  std::vector<double> outer(static_cast<std::size_t>(n + 2), 0.0);
  for (long j = n; j >= 0; --j) outer[j] = outer[j + 1] + (j == 0 ? 0.0 : law.at(j) + law.at(-j));
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (long L : levels) {
    double tail;
    if (L < 0)
      tail = 1.0;
    else if (L >= n)
      tail = 0.0;
    else
      tail = outer[L + 1];
    t.tails.push_back(tail);
    t.log_tails.push_back(tail > 0.0 ? std::log(tail) : -kInf);
    if (tail > 0.0) {
      const double x = static_cast<double>(L), y = std::log(tail);
      sx += x;
      sy += y;
      sxx += x * x;
      sxy += x * y;
      ++t.fitted_points;
    }
  }
  if (t.fitted_points >= 2) {
    const double m = static_cast<double>(t.fitted_points);
    const double den = m * sxx - sx * sx;
    if (den != 0.0) {
      t.slope = (m * sxy - sx * sy) / den;
      t.intercept = (sy - t.slope * sx) / m;
    }
  }
  return t;
}

double above_level_fraction(const ModelParams& params, const DisorderField& disorder, long n, long k) {
  double above = 0.0;
  forward(params, disorder, n, &k, &above);
  return above;
}

}  // namespace pinning
