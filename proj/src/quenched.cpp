#include "pinning/quenched.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "pinning/errors.hpp"
#include "pinning/homogeneous.hpp"
#include "pinning/parallel.hpp"
#include "pinning/renewal.hpp"
#include "pinning/rng.hpp"

namespace pinning {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

void require_disorder(const DisorderField& disorder, long n) {
  if (n < 1) throw SizeError("system size must be >= 1");
  if (static_cast<long>(disorder.size()) < n) throw SizeError("disorder field shorter than system size");
}

// log((1 + e^{-2h m}) / 2) for the unfinished last excursion of length m
double log_free_end_sign_factor(double h, long m) {
  if (m == 0) return 0.0;
  return std::log1p(repulsion_factor(h, 2.0 * static_cast<double>(m))) - kLog2;
}

}  // namespace

std::vector<double> sign_averaged_kernel(double h, long m) {
  std::vector<double> k(static_cast<std::size_t>(m + 1), 0.0);
  for (long l = 1; l <= m; ++l) k[l] = excursion_weight(h, l);
  return k;
}

std::vector<double> contact_log_rewards(const ModelParams& params, const DisorderField& disorder, long m) {
  std::vector<double> w(static_cast<std::size_t>(m + 1), 0.0);
  if (params.s == 0.0) {
    std::fill(w.begin() + 1, w.end(), params.beta);
    return w;
  }
  for (long k = 1; k <= m; ++k) w[k] = params.beta * (1.0 + params.s * disorder.at(static_cast<std::size_t>(2 * k)));
  return w;
}

std::vector<double> constrained_log_partitions(const ModelParams& params, const DisorderField& disorder, long m) {
  params.validate();
  if (m > 0) require_disorder(disorder, 2 * m);
  return renewal_log_partition(sign_averaged_kernel(params.h, m), contact_log_rewards(params, disorder, m));
}

double free_from_constrained(const std::vector<double>& log_zc, double h, long n) {
  const long m = n / 2;
  if (static_cast<long>(log_zc.size()) < m + 1) throw SizeError("free_from_constrained: too few constrained values");
  std::vector<double> terms(static_cast<std::size_t>(m + 1));
  for (long j = 0; j <= m; ++j) {
    const long rest = n - 2 * j;
    terms[j] = log_zc[j] + log_free_end_sign_factor(h, rest) + log_return_tail(rest / 2);
  }
  return log_sum_exp(terms);
}

PartitionTrace partition_constrained(const ModelParams& params, const DisorderField& disorder, long n,
                                     bool with_contacts) {
  if (n < 2 || n % 2 != 0) throw SizeError("partition_constrained: n must be even and >= 2");
  require_disorder(disorder, n);
  PartitionTrace t;
  t.n = n;
  t.params = params;
  t.disorder_seed = disorder.seed;
  if (with_contacts) {
    ContactProfile prof = contact_profile(params, disorder, n);
    t.contact_expectation = prof.expected_contacts;
  }
  t.log_zc = constrained_log_partitions(params, disorder, n / 2);
  t.log_zf = free_from_constrained(t.log_zc, params.h, n);
  return t;
}

double partition_free(const ModelParams& params, const DisorderField& disorder, long n) {
  require_disorder(disorder, n);
  return free_from_constrained(constrained_log_partitions(params, disorder, n / 2), params.h, n);
}

double brute_force_partition(const ModelParams& params, const DisorderField& disorder, long n) {
  params.validate();
  if (n > kBruteForceMaxN) throw SizeError("brute_force_partition: n > 20 refused (2^n paths)");
  require_disorder(disorder, n);
  const std::uint32_t paths = 1u << n;
  std::vector<double> hamiltonian(paths);
  for (std::uint32_t mask = 0; mask < paths; ++mask) {
    long height = 0;
    int last_sign = +1;
    double energy = 0.0;
    long below = 0;
    for (long i = 1; i <= n; ++i) {
      height += ((mask >> (i - 1)) & 1u) ? 1 : -1;
      if (height != 0) last_sign = height > 0 ? 1 : -1;
      if (height == 0) energy += params.beta * (1.0 + params.s * disorder.at(static_cast<std::size_t>(i)));
      if (last_sign < 0) ++below;
    }
    if (below > 0) {
      if (std::isinf(params.h)) {
        energy = kNegInf;
      } else {
        energy -= 2.0 * params.h * static_cast<double>(below);
      }
    }
    hamiltonian[mask] = energy;
  }
  return log_sum_exp(hamiltonian) - static_cast<double>(n) * kLog2;
}

ContactProfile contact_profile(const ModelParams& params, const DisorderField& disorder, long n) {
  if (n < 2 || n % 2 != 0) throw SizeError("contact_profile: n must be even and >= 2");
  params.validate();
  require_disorder(disorder, n);
  const long m = n / 2;
  const std::vector<double> kernel = sign_averaged_kernel(params.h, m);
  const std::vector<double> w = contact_log_rewards(params, disorder, m);
  const std::vector<double> fwd = renewal_log_partition(kernel, w);

  // Backward pass: R solves the same recursion with reversed rewards, and the
  // partition of the segment [2k, n] (reward at 2k excluded) is
  // exp(w(m)) R(m - k) exp(-w(k)).
  std::vector<double> wr(static_cast<std::size_t>(m + 1), 0.0);
  for (long j = 1; j <= m; ++j) wr[j] = w[m - j];
  const std::vector<double> bwd = renewal_log_partition(kernel, wr);

  ContactProfile prof;
  prof.log_z = fwd[m];
  prof.marginals.assign(static_cast<std::size_t>(m + 1), 0.0);
  prof.marginals[0] = 1.0;
  double total = 0.0;
  for (long k = 1; k <= m; ++k) {
    const double log_seg = w[m] + bwd[m - k] - w[k];
    const double p = std::exp(fwd[k] + log_seg - fwd[m]);
    prof.marginals[k] = std::min(p, 1.0);
    total += prof.marginals[k];
  }
  prof.expected_contacts = total;
  return prof;
}

double contact_fraction(const ModelParams& params, const DisorderField& disorder, long n) {
  return contact_profile(params, disorder, n).expected_contacts / static_cast<double>(n);
}

std::uint64_t replica_seed(std::uint64_t seed, long r) { return derive_seed(seed, static_cast<std::uint64_t>(r)); }

namespace {

double per_site_log_z(const ModelParams& params, const DisorderField& disorder, long n, FreeEnergyMode mode) {
  if (mode == FreeEnergyMode::free) return partition_free(params, disorder, n) / static_cast<double>(n);
  if (n % 2 != 0) throw SizeError("constrained free energy needs even n");
  return constrained_log_partitions(params, disorder, n / 2).back() / static_cast<double>(n);
}

}  // namespace

FreeEnergyEstimate free_energy_quenched(const ModelParams& params, const DisorderSpec& spec, long n, long replicas,
                                        std::uint64_t seed, FreeEnergyMode mode, unsigned threads) {
  if (replicas < 1) throw DomainError("free_energy_quenched: replicas must be >= 1");
  params.validate();
  std::vector<double> values;
  if (params.s == 0.0) {
    // The environment does not enter; every replica gives the same number.
    const double v = per_site_log_z(params, constant_disorder(static_cast<std::size_t>(n)), n, mode);
    values.assign(static_cast<std::size_t>(replicas), v);
  } else {
    values = parallel_map(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
      const DisorderField field = make_disorder(spec, static_cast<std::size_t>(n), replica_seed(seed, static_cast<long>(r)));
      return per_site_log_z(params, field, n, mode);
    });
  }
  const SampleStats st = sample_stats(values);
  return {st.mean, st.std_err, n, replicas, mode};
}

double free_energy_annealed(const ModelParams& params, const DisorderSpec& spec, long n, FreeEnergyMode mode) {
  params.validate();
  const ModelParams averaged{annealed_exponent(params.beta, params.s, spec), params.h, 0.0};
  return per_site_log_z(averaged, constant_disorder(static_cast<std::size_t>(n)), n, mode);
}

double free_energy_hom_finite(double beta, double h, long n, FreeEnergyMode mode) {
  return per_site_log_z({beta, h, 0.0}, constant_disorder(static_cast<std::size_t>(n)), n, mode);
}

double mean_contact_fraction(const ModelParams& params, const DisorderSpec& spec, long n, long replicas,
                             std::uint64_t seed, unsigned threads) {
  if (params.s == 0.0) return contact_fraction(params, constant_disorder(static_cast<std::size_t>(n)), n);
  const std::vector<double> f = parallel_map(static_cast<std::size_t>(replicas), threads, [&](std::size_t r) {
    const DisorderField field = make_disorder(spec, static_cast<std::size_t>(n), replica_seed(seed, static_cast<long>(r)));
    return contact_fraction(params, field, n);
  });
  return sample_stats(f).mean;
}

}  // namespace pinning

namespace pinning {

namespace {

struct Detector {
  double beta;
  double s;
  const DisorderSpec& spec;
  const BracketOptions& opt;
  int evaluations = 0;

  bool localized_reading(double h) {
    ++evaluations;
    return mean_contact_fraction({beta, h, s}, spec, opt.n, opt.replicas, opt.seed, opt.threads) > opt.threshold;
  }

  bool certified(double h) {
    ++evaluations;
    const FreeEnergyEstimate e =
        free_energy_quenched({beta, h, s}, spec, opt.n, opt.replicas, opt.seed, FreeEnergyMode::constrained, opt.threads);
    return e.mean - 3.0 * e.std_err > 0.0;
  }
};

// sup{h in [lo, hi] : pred(h)} given pred(lo) = true, pred(hi) = false
template <class P>
std::pair<double, double> bisect_predicate(P&& pred, double lo, double hi, double tol) {
  for (int it = 0; it < 200 && hi - lo > tol; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (pred(mid))
      lo = mid;
    else
      hi = mid;
  }
  return {lo, hi};
}

}  // namespace

CriticalBracket bracket_critical_h(double beta, double s, const DisorderSpec& spec, const BracketOptions& opt) {
  if (!(opt.threshold > 0.0)) throw DomainError("bracket_critical_h: threshold must be > 0");
  if (opt.n < 2 || opt.n % 2 != 0) throw SizeError("bracket_critical_h: n must be even");
  if (opt.replicas < 1) throw DomainError("bracket_critical_h: replicas must be >= 1");
  ModelParams{beta, 0.0, s}.validate();

  Detector det{beta, s, spec, opt};
  CriticalBracket out;
  const double hc0 = critical_h_hom(beta);
  const double h_ann = annealed_critical_h(beta, s, spec);

  // h = inf is an exact limit of the model; a reading there means the
  // detector fires for every h.
  if (det.localized_reading(kInf)) {
    out.divergent = true;
    out.h_lo = out.h_hi = out.raw_h_lo = out.raw_h_hi = kInf;
    out.low_confidence = !det.certified(kInf);
    out.evaluations = det.evaluations;
    return out;
  }

  double top = std::isfinite(h_ann) ? h_ann + 1.0 : 1.0;
  while (det.localized_reading(top)) top *= 2.0;

  double hi_end = 0.0;
  if (det.localized_reading(0.0)) {
    const auto [lo, hi] = bisect_predicate([&](double h) { return det.localized_reading(h); }, 0.0, top, opt.h_tol);
    hi_end = hi;
    // probe beyond the crossing; readings that fire again mean noise
    for (double k : {2.0, 8.0, 32.0}) {
      const double probe = hi + k * opt.h_tol;
      if (probe < top && det.localized_reading(probe)) {
        out.low_confidence = true;
        hi_end = std::max(hi_end, probe + opt.h_tol);
      }
    }
    const double inner = lo - 4.0 * opt.h_tol;
    if (inner > 0.0 && !det.localized_reading(inner)) out.low_confidence = true;
  }

  double lo_end = 0.0;
  if (det.certified(0.0)) {
    double cert_top = std::max(hi_end, opt.h_tol);
    if (det.certified(cert_top)) {
      // detector crossing inside the certified region: threshold too high for this n
      out.low_confidence = true;
      while (det.certified(cert_top)) cert_top *= 2.0;
    }
    lo_end = bisect_predicate([&](double h) { return det.certified(h); }, 0.0, cert_top, opt.h_tol).first;
  }

  out.raw_h_lo = std::min(lo_end, hi_end);
  out.raw_h_hi = std::max(lo_end, hi_end);
  const double floor_v = std::max(0.0, hc0 - opt.clamp_eps);
  const double ceil_v = h_ann + opt.clamp_eps;
  out.h_lo = std::clamp(out.raw_h_lo, floor_v, ceil_v);
  out.h_hi = std::clamp(out.raw_h_hi, floor_v, ceil_v);
  if (out.h_lo != out.raw_h_lo || out.h_hi != out.raw_h_hi) out.clamped = true;
  out.evaluations = det.evaluations;
  return out;
}

}  // namespace pinning
