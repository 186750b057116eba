#include "pinning/tilted.hpp"

#include <algorithm>
#include <climits>
#include <cmath>
#include <sstream>

#include "pinning/errors.hpp"
#include "pinning/homogeneous.hpp"
#include "pinning/parallel.hpp"
#include "pinning/quenched.hpp"
#include "pinning/rng.hpp"

namespace pinning {

namespace {

// Compensated running sum.
struct Neumaier {
  double sum = 0.0;
  double comp = 0.0;
  void add(double v) {
    const double t = sum + v;
    comp += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + comp; }
};

// sqrt(1 - e^{-4h}), with h = inf giving 1
double repulsion_radical(double h) {
  if (std::isinf(h)) return 1.0;
  return std::sqrt(-std::expm1(-4.0 * h));
}

void survival_from_probs(ExcursionDistribution& d) {
  const long k_max = d.half_len();
  d.survival.assign(static_cast<std::size_t>(k_max + 1), 0.0);
  double acc = d.overflow;
  d.survival[k_max] = acc;
  for (long k = k_max; k >= 2; --k) {
    acc += d.probs[k];
    d.survival[k - 1] = acc;
  }
  d.survival[0] = 1.0;
}

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(17);
  os << v;
  return os.str();
}

}  // namespace

double ExcursionDistribution::total() const {
  Neumaier acc;
  for (double p : probs) acc.add(p);
  acc.add(overflow);
  return acc.value();
}

double ExcursionDistribution::truncated_mean() const {
  Neumaier acc;
  for (long k = 1; k <= half_len(); ++k) acc.add(2.0 * static_cast<double>(k) * probs[k]);
  return acc.value();
}

double TiltedLaw::remainder_bound() const {
  const long k_max = trunc / 2;
  const double z = alpha * alpha;
  const double z2 = z * repulsion_factor(h, 4.0);
  const double kk = static_cast<double>(k_max + 1);
  return std::exp(beta) * 0.5 * (std::pow(z, kk) + std::pow(z2, kk)) * return_tail(k_max);
}

TiltedLaw hom_tilted_law(double alpha, double h, double beta, long trunc) {
  if (!(alpha > 0.0 && alpha <= 1.0)) throw DomainError("hom_tilted_law: alpha must lie in (0, 1]");
  if (trunc < 2 || trunc % 2 != 0) throw SizeError("hom_tilted_law: trunc must be even and >= 2");
  ModelParams{beta, h, 0.0}.validate();

  const long k_max = trunc / 2;
  const double e4 = repulsion_factor(h, 4.0);
  const double om = (1.0 - alpha) * (1.0 + alpha);  // 1 - alpha^2
  const double r_h = repulsion_radical(h);
  const double om2 = r_h * r_h + e4 * om;  // 1 - e^{-4h} alpha^2
  const double denom = 1.0 - 0.5 * (std::sqrt(om) + std::sqrt(om2));
  if (!(denom > 0.0)) throw DomainError("hom_tilted_law: nonpositive normalizer");

  TiltedLaw law;
  law.alpha = alpha;
  law.h = h;
  law.beta = beta;
  law.trunc = trunc;
  law.normalizer = std::exp(beta) * denom;

  const double log_z = 2.0 * std::log(alpha);
  const double log_z2 = e4 > 0.0 ? log_z - 4.0 * h : -kInf;
  ExcursionDistribution& d = law.dist;
  d.probs.assign(static_cast<std::size_t>(k_max + 1), 0.0);
  Neumaier s1, s2;
  for (long k = 1; k <= k_max; ++k) {
    const double lp = log_return_prob(k);
    const double kd = static_cast<double>(k);
    const double t1 = std::exp(kd * log_z + lp);
    const double t2 = e4 > 0.0 ? std::exp(kd * log_z2 + lp) : 0.0;
    s1.add(t1);
    s2.add(t2);
    d.probs[k] = 0.5 * (t1 + t2) / denom;
  }
  law.series_normalizer = std::exp(beta) * 0.5 * (s1.value() + s2.value());
  const double rem1 = std::max(0.0, (1.0 - std::sqrt(om)) - s1.value());
  const double rem2 = std::max(0.0, (1.0 - std::sqrt(om2)) - s2.value());
  d.overflow = 0.5 * (rem1 + rem2) / denom;
  survival_from_probs(d);
  return law;
}

bool TiltMargins::all_hold() const {
  return std::all_of(items.begin(), items.end(), [](const Margin& m) { return m.margin >= 0.0; });
}

const Margin& TiltMargins::weakest() const {
  return *std::min_element(items.begin(), items.end(),
                           [](const Margin& a, const Margin& b) { return a.margin < b.margin; });
}

TiltConstants tilt_alpha(double beta, double s, double h) {
  ModelParams{beta, h, s}.validate();
  if (s > 1.0) throw DomainError("tilt constants need s <= 1");
  if (beta > kLog2) throw DomainError("tilt constants need beta <= log 2");
  if (beta * s > kLog2) throw DomainError("tilt constants need beta s <= log 2");
  if (!(h > 0.0)) throw DomainError("tilt constants need h > 0");
  TiltConstants k;
  k.alpha1 = beta * s / 1280.0;
  k.sqrt_c = beta * s / (48.0 * (1.0 + 1.0 / (2.0 * repulsion_radical(h))));
  k.c = k.sqrt_c * k.sqrt_c;
  k.alpha_sq = 1.0 - k.c * k.alpha1 * k.alpha1;
  return k;
}

TiltMargins tilt_margins(double h, const TiltedLaw& law, const TiltConstants& k) {
  const double p2 = law.p2();
  const double odds = p2 / (1.0 - p2);
  const double sca = k.sqrt_c * k.alpha1;
  TiltMargins m;
  m.items = {
      {"P(2) <= 7/8", 0.875 - p2},
      {"P(2) >= 1/8", p2 - 0.125},
      {"P(2)/(1-P(2)) >= 1/7", odds - 1.0 / 7.0},
      {"P(2)/(1-P(2)) <= 7", 7.0 - odds},
      {"alpha^2 >= 3/4", k.alpha_sq - 0.75},
      {"sqrt(c) alpha1 <= 1/4", 0.25 - sca},
      {"sqrt(c) alpha1 (1 + 1/(2 sqrt(1-e^{-4h}))) <= 1/3",
       1.0 / 3.0 - sca * (1.0 + 1.0 / (2.0 * repulsion_radical(h)))},
      {"7 alpha1 < 1/3", 1.0 / 3.0 - 7.0 * k.alpha1},
      {"mu1 > 0", k.mu1},
  };
  return m;
}

TiltConstants tilt_constants(double beta, double s, double h, const TiltedLaw& law) {
  TiltConstants k = tilt_alpha(beta, s, h);
  if (law.beta != beta || law.h != h) throw DomainError("tilt_constants: law built for different (beta, h)");
  if (std::abs(law.alpha * law.alpha - k.alpha_sq) > 4e-16)
    throw DomainError("tilt_constants: law alpha differs from sqrt(1 - c alpha1^2)");
  const double p2 = law.p2();
  k.mu1 = 1.0 - k.alpha1 * p2 / (1.0 - p2);
  const TiltMargins m = tilt_margins(h, law, k);
  for (const Margin& item : m.items)
    if (!(item.margin >= 0.0))
      throw DomainError("tilt_constants: inequality " + item.name + " fails (margin " + fmt(item.margin) +
                        ", P(2) = " + fmt(p2) + ")");
  return k;
}

TiltSetup make_tilt(double beta, double s, double h, long trunc) {
  const TiltConstants base = tilt_alpha(beta, s, h);
  TiltSetup out;
  out.law = hom_tilted_law(std::sqrt(base.alpha_sq), h, beta, trunc);
  out.constants = tilt_constants(beta, s, h, out.law);
  out.margins = tilt_margins(h, out.law, out.constants);
  return out;
}

ExcursionDistribution env_tilted_step(const TiltedLaw& law, const TiltConstants& k, double zeta_next) {
  ExcursionDistribution d = law.dist;
  if (!(zeta_next > 0.0)) return d;
  d.probs[1] *= 1.0 + k.alpha1;
  for (long j = 2; j <= d.half_len(); ++j) d.probs[j] *= k.mu1;
  d.overflow *= k.mu1;
  for (long j = 1; j <= d.half_len(); ++j) d.survival[j] *= k.mu1;
  return d;
}

long draw_half_length(const std::vector<double>& survival, double u, double scale) {
  const long k_max = static_cast<long>(survival.size()) - 1;
  if (scale * survival[k_max] >= u) return 0;
  long lo = 1, hi = k_max;
  while (lo < hi) {
    const long mid = lo + (hi - lo) / 2;
    if (scale * survival[mid] < u)
      hi = mid;
    else
      lo = mid + 1;
  }
  return lo;
}

std::vector<long> sample_excursions(const ExcursionDistribution& dist, long count, std::uint64_t seed) {
  CounterRng rng(seed);
  std::vector<long> out(static_cast<std::size_t>(std::max(count, 0L)));
  for (auto& v : out) {
    const long k = draw_half_length(dist.survival, rng.uniform_pos());
    v = k == 0 ? -1 : 2 * k;
  }
  return out;
}

namespace {

void require_sampler_sizes(const TiltedLaw& law, const DisorderField& disorder, long n) {
  if (n < 1) throw SizeError("sampler: n must be >= 1");
  if (law.trunc < n) throw TruncationError("sampler: law horizon shorter than n", n + n % 2);
  if (static_cast<long>(disorder.size()) < n) throw SizeError("sampler: disorder shorter than n");
}

}  // namespace

std::vector<long> sample_contacts(const TiltedLaw& law, const TiltConstants& k, const DisorderField& disorder,
                                  long n, std::uint64_t seed) {
  require_sampler_sizes(law, disorder, n);
  CounterRng rng(seed);
  std::vector<long> contacts;
  long x = 0;
  while (x + 2 <= n) {
    const double scale = disorder.at(static_cast<std::size_t>(x + 2)) > 0.0 ? k.mu1 : 1.0;
    const long half = draw_half_length(law.dist.survival, rng.uniform_pos(), scale);
    if (half == 0) break;
    x += 2 * half;
    if (x > n) break;
    contacts.push_back(x);
  }
  return contacts;
}

bool PairedEstimate::consistent(double k) const {
  const double d = std::abs(estimate - prediction);
  if (diff_stderr == 0.0) return d == 0.0;
  return d <= k * diff_stderr;
}

namespace {

struct ReplicaTerms {
  double e1 = 0.0, pred1 = 0.0;
  double e2 = 0.0, pred2 = 0.0;
  double contacts = 0.0;
};

PairedEstimate pair_up(const std::vector<ReplicaTerms>& runs, double ReplicaTerms::*est,
                       double ReplicaTerms::*pred) {
  std::vector<double> a, b, d;
  a.reserve(runs.size());
  b.reserve(runs.size());
  d.reserve(runs.size());
  for (const auto& r : runs) {
    a.push_back(r.*est);
    b.push_back(r.*pred);
    d.push_back(r.*est - r.*pred);
  }
  const SampleStats sa = sample_stats(a), sb = sample_stats(b), sd = sample_stats(d);
  PairedEstimate p;
  p.estimate = sa.mean;
  p.estimate_stderr = sa.std_err;
  p.prediction = sb.mean;
  p.prediction_stderr = sb.std_err;
  p.diff_stderr = sd.std_err;
  p.replicas = static_cast<long>(runs.size());
  return p;
}

constexpr std::uint64_t kWalkStream = 0x77616c6bULL;

}  // namespace

TiltRunSummary run_tilted(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                          const TiltConstants& k, const TiltRunOptions& opt) {
  params.validate();
  if (opt.replicas < 1) throw DomainError("run_tilted: replicas must be >= 1");
  const long n = opt.n;
  if (law.trunc < n) throw TruncationError("run_tilted: law horizon shorter than n", n + n % 2);
  const double nd = static_cast<double>(n);
  const double bs = params.beta * params.s;
  const double p2 = law.p2();
  const double e_pos = spec.positive_part_mean();
  const double p_pos = spec.prob_positive();
  const double log_boost = std::log1p(k.alpha1);
  const double log_mu = std::log(k.mu1);
  const double short_cost = p2 * (1.0 + k.alpha1) * log_boost;
  const std::vector<double>& surv = law.dist.survival;

  const auto runs = parallel_map(static_cast<std::size_t>(opt.replicas), opt.threads, [&](std::size_t r) {
    const std::uint64_t rs = replica_seed(opt.seed, static_cast<long>(r));
    const DisorderField field = make_disorder(spec, static_cast<std::size_t>(n), rs);
    const std::vector<long> contacts = sample_contacts(law, k, field, n, derive_seed(rs, kWalkStream));

    ReplicaTerms t;
    double zeta_sum = 0.0;
    double cost = 0.0;
    double pred_cost = 0.0;
    long early = 0;  // contacts in {0, ..., n - 2}
    long prev = 0;
    auto account_start = [&](long x) {
      ++early;
      const long room = (n - x) / 2;
      const double longer = room >= 2 ? surv[1] - surv[room] : 0.0;
      pred_cost += p_pos * (short_cost + k.mu1 * log_mu * longer);
    };
    account_start(0);
    for (long x : contacts) {
      zeta_sum += field.at(static_cast<std::size_t>(x));
      if (field.at(static_cast<std::size_t>(prev + 2)) > 0.0) cost -= (x - prev == 2) ? log_boost : log_mu;
      if (x <= n - 2) account_start(x);
      prev = x;
    }
    t.e1 = bs * zeta_sum / nd;
    t.pred1 = bs * k.alpha1 * p2 * e_pos * static_cast<double>(early) / nd;
    t.e2 = cost / nd;
    t.pred2 = -pred_cost / nd;
    t.contacts = static_cast<double>(contacts.size()) / nd;
    return t;
  });

  TiltRunSummary out;
  out.e1 = pair_up(runs, &ReplicaTerms::e1, &ReplicaTerms::pred1);
  out.e2 = pair_up(runs, &ReplicaTerms::e2, &ReplicaTerms::pred2);
  std::vector<double> l;
  l.reserve(runs.size());
  for (const auto& r : runs) l.push_back(r.contacts);
  const SampleStats sl = sample_stats(l);
  out.contacts_per_step = sl.mean;
  out.contacts_per_step_stderr = sl.std_err;
  return out;
}

PairedEstimate energy_term(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                           const TiltConstants& k, const TiltRunOptions& opt) {
  return run_tilted(params, spec, law, k, opt).e1;
}

PairedEstimate entropy_term(const ModelParams& params, const DisorderSpec& spec, const TiltedLaw& law,
                            const TiltConstants& k, const TiltRunOptions& opt) {
  return run_tilted(params, spec, law, k, opt).e2;
}

double min8_bracket(double beta, double s, double h) { return q_shift(beta, s) + contact_exponent(beta, h); }

namespace {

// Terms alpha^{2k} P_srw(2k), k = 1..K, and the part of the series beyond K.
struct UntiltedSeries {
  std::vector<double> terms;
  double beyond = 0.0;
  double denom = 0.0;  // (1 - sqrt(1 - alpha^2)) / 2
};

UntiltedSeries untilted_series(const TiltedLaw& law) {
  const long k_max = law.trunc / 2;
  const double om = (1.0 - law.alpha) * (1.0 + law.alpha);
  const double log_z = 2.0 * std::log(law.alpha);
  UntiltedSeries u;
  u.terms.assign(static_cast<std::size_t>(k_max + 1), 0.0);
  Neumaier acc;
  for (long k = 1; k <= k_max; ++k) {
    u.terms[k] = std::exp(static_cast<double>(k) * log_z + log_return_prob(k));
    acc.add(u.terms[k]);
  }
  u.beyond = std::max(0.0, (1.0 - std::sqrt(om)) - acc.value());
  u.denom = 0.5 * (1.0 - std::sqrt(om));
  return u;
}

// Upper bound on sum_{k > K} z^k P_srw(2k), usable for any K.
double series_tail_upper(double z, long k) {
  double b = return_tail(k);
  if (z < 1.0) b = std::min(b, std::exp(static_cast<double>(k + 1) * std::log(z) + log_return_prob(k + 1)) / (1.0 - z));
  return b;
}

long sufficient_horizon(double z, double denom, double target, long from_half) {
  const double goal = target * denom;
  long hi = std::max(from_half, 1L);
  const long cap = LONG_MAX / 4;
  while (series_tail_upper(z, hi) > goal) {
    if (hi > cap / 2) return LONG_MAX;
    hi *= 2;
  }
  long lo = hi / 2;
  while (hi - lo > 1) {
    const long mid = lo + (hi - lo) / 2;
    if (series_tail_upper(z, mid) > goal)
      lo = mid;
    else
      hi = mid;
  }
  return 2 * hi;
}

}  // namespace

double uniform_tail_bound(const TiltedLaw& law, long n0) {
  const UntiltedSeries u = untilted_series(law);
  const long k_max = law.trunc / 2;
  const long first = n0 / 2 + 1;
  Neumaier acc;
  acc.add(u.beyond);
  for (long k = k_max; k >= first; --k) acc.add(u.terms[k]);
  if (first > k_max + 1) {
    // beyond the horizon only the analytic bound is available
    return series_tail_upper(law.alpha * law.alpha, first - 1) / u.denom;
  }
  return acc.value() / u.denom;
}

BoundLedger assemble_min8(double beta, double s, double h, const TiltedLaw& law, const TiltConstants& k,
                          double target_tail) {
  (void)k;
  tilt_alpha(beta, s, h);
  BoundLedger b;
  b.beta = beta;
  b.s = s;
  b.h = h;
  b.bracket = min8_bracket(beta, s, h);
  b.bracket_positive = b.bracket > 0.0;
  b.target_tail = target_tail > 0.0 ? target_tail : q_shift(beta, s);
  if (!(b.target_tail > 0.0)) throw DomainError("assemble_min8: target tail is 0 (s = 0), N0 undefined");

  const UntiltedSeries u = untilted_series(law);
  const long k_max = law.trunc / 2;
  // suffix[j] = sum_{k > j} terms + beyond, for j = 0..K
  std::vector<double> suffix(static_cast<std::size_t>(k_max + 1));
  Neumaier acc;
  acc.add(u.beyond);
  suffix[k_max] = acc.value();
  for (long j = k_max - 1; j >= 0; --j) {
    acc.add(u.terms[j + 1]);
    suffix[j] = acc.value();
  }
  for (long j = 0; j <= k_max; ++j) {
    const double bound = suffix[j] / u.denom;
    if (bound <= b.target_tail) {
      b.n0 = 2 * j;
      b.tail_at_n0 = bound;
      return b;
    }
  }
  const long need = sufficient_horizon(law.alpha * law.alpha, u.denom, b.target_tail, k_max);
  throw TruncationError("assemble_min8: tail target " + fmt(b.target_tail) + " not reached within horizon " +
                            std::to_string(law.trunc),
                        need);
}

DominanceReport dominance_check(const ExcursionDistribution& a, const ExcursionDistribution& b, double tol) {
  if (a.half_len() != b.half_len()) throw SizeError("dominance_check: laws on different horizons");
  const long k_max = a.half_len();
  auto mass_a = [&](long j) { return j <= k_max ? a.probs[j] : a.overflow; };
  auto mass_b = [&](long j) { return j <= k_max ? b.probs[j] : b.overflow; };

  DominanceReport r;
  r.max_cdf_violation = -kInf;
  for (long j = 0; j <= k_max; ++j) r.max_cdf_violation = std::max(r.max_cdf_violation, a.survival[j] - b.survival[j]);
  r.dominates = r.max_cdf_violation <= tol;

  long last_above = 1;
  for (long j = 1; j <= k_max + 1; ++j)
    if (mass_a(j) > mass_b(j) + tol) last_above = j;
  bool ok = true;
  for (long j = 1; j <= last_above && ok; ++j) ok = mass_a(j) >= mass_b(j) - tol;
  r.single_crossing = ok;
  if (ok) r.crossing_index = last_above;
  return r;
}

OrderingEstimate expected_contacts_ordering(const ModelParams& params, const DisorderSpec& spec,
                                            const TiltedLaw& law, const TiltConstants& k,
                                            const TiltRunOptions& opt) {
  params.validate();
  if (opt.replicas < 1) throw DomainError("expected_contacts_ordering: replicas must be >= 1");
  const long n = opt.n;
  if (law.trunc < n) throw TruncationError("expected_contacts_ordering: law horizon shorter than n", n + n % 2);
  const TiltedLaw floor_law = hom_tilted_law(law.alpha, kInf, 0.0, law.trunc);
  const DominanceReport first = dominance_check(env_tilted_step(law, k, 1.0), law.dist);
  const DominanceReport second = dominance_check(law.dist, floor_law.dist);
  if (!first.dominates || !second.dominates) {
    throw DomainError("expected_contacts_ordering: dominance precondition fails (tilted vs hom violation " +
                      fmt(first.max_cdf_violation) + ", hom vs untilted violation " +
                      fmt(second.max_cdf_violation) + ")");
  }
  const std::vector<double>& s_hom = law.dist.survival;
  const std::vector<double>& s_floor = floor_law.dist.survival;

  struct Draw {
    long lt = 0, lh = 0, l0 = 0;
  };
  const auto draws = parallel_map(static_cast<std::size_t>(opt.replicas), opt.threads, [&](std::size_t r) {
    const std::uint64_t rs = replica_seed(opt.seed, static_cast<long>(r));
    const DisorderField field = make_disorder(spec, static_cast<std::size_t>(n), rs);
    CounterRng rng(derive_seed(rs, kWalkStream));
    Draw d;
    long xt = 0, xh = 0, x0 = 0;
    bool at = true, ah = true, a0 = true;
    auto advance = [&](long& x, bool& alive, long& count, const std::vector<double>& surv, double scale, double u) {
      if (!alive) return;
      const long half = x + 2 <= n ? draw_half_length(surv, u, scale) : 0;
      if (half == 0 || x + 2 * half > n) {
        alive = false;
        return;
      }
      x += 2 * half;
      ++count;
    };
    while (at || ah || a0) {
      const double u = rng.uniform_pos();
      const double scale = at && xt + 2 <= n && field.at(static_cast<std::size_t>(xt + 2)) > 0.0 ? k.mu1 : 1.0;
      advance(xt, at, d.lt, s_hom, scale, u);
      advance(xh, ah, d.lh, s_hom, 1.0, u);
      advance(x0, a0, d.l0, s_floor, 1.0, u);
    }
    return d;
  });

  OrderingEstimate out;
  out.draws = static_cast<long>(draws.size());
  std::vector<double> vt, vh, v0;
  const double nd = static_cast<double>(n);
  for (const Draw& d : draws) {
    vt.push_back(static_cast<double>(d.lt) / nd);
    vh.push_back(static_cast<double>(d.lh) / nd);
    v0.push_back(static_cast<double>(d.l0) / nd);
    if (!(d.lt >= d.lh && d.lh >= d.l0)) ++out.violations;
  }
  const SampleStats st = sample_stats(vt), sh = sample_stats(vh), s0 = sample_stats(v0);
  out.tilted = st.mean;
  out.tilted_stderr = st.std_err;
  out.hom = sh.mean;
  out.hom_stderr = sh.std_err;
  out.untilted = s0.mean;
  out.untilted_stderr = s0.std_err;
  return out;
}

}  // namespace pinning
