#include "pinning/homogeneous.hpp"

#include <cmath>

#include "pinning/errors.hpp"

namespace pinning {

namespace {

// Monotone bisection: f(lo) and f(hi) have opposite signs, `increasing` tells
// which side is which. Stops on |f| <= tol once the bracket has collapsed to a
// few ulps, or after kBisectMaxIter halvings.
template <class F>
double bisect(F&& f, double lo, double hi, bool increasing) {
  for (int it = 0; it < kBisectMaxIter; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    const double v = f(mid);
    if ((v > 0.0) == increasing)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// 1 - e^{-4h}, exact at h = 0 and h = inf
double one_minus_decay(double h) {
  if (std::isinf(h)) return 1.0;
  return -std::expm1(-4.0 * h);
}

}  // namespace

double theta_term(double beta, double h, double z) {
  if (!(z >= 0.0 && z <= 1.0)) throw DomainError("theta_term: z must lie in [0, 1]");
  const double z2 = z * z;
  const double decay = repulsion_factor(h, 4.0);
  return 0.5 * std::exp(beta) * (2.0 - std::sqrt(1.0 - z2) - std::sqrt(1.0 - z2 * decay));
}

double free_energy_hom(double beta, double h) {
  ModelParams{beta, h, 0.0}.validate();
  if (theta_term(beta, h, 1.0) <= 1.0) return 0.0;
  const double z = bisect([&](double zz) { return theta_term(beta, h, zz) - 1.0; }, 0.0, 1.0, true);
  return -std::log(z);
}

double critical_h_hom(double beta) {
  if (!(beta >= 0.0)) throw DomainError("critical_h_hom: beta must be >= 0");
  if (beta >= kLog2) return kInf;
  const double a = -std::expm1(-beta);
  const double arg = 4.0 * a * a;
  if (arg >= 1.0) return kInf;
  return -0.25 * std::log1p(-arg);
}

double annealed_exponent(double beta, double s, const DisorderSpec& spec) {
  return beta + spec.cumulant(beta * s);
}

double annealed_critical_h(double beta, double s, const DisorderSpec& spec) {
  return critical_h_hom(annealed_exponent(beta, s, spec));
}

double beta_ann(double s, const DisorderSpec& spec) {
  if (!(s >= 0.0)) throw DomainError("beta_ann: s must be >= 0");
  if (s == 0.0) return kLog2;
  return bisect([&](double b) { return annealed_exponent(b, s, spec) - kLog2; }, 0.0, kLog2, true);
}

double q_shift(double beta, double s) { return beta * beta * s * s / (5.0 * 16384.0); }

BoundValue theorem_lower_bound(double beta, double s) {
  if (!(s >= 0.0) || !(beta >= 0.0)) throw DomainError("theorem_lower_bound: beta, s must be >= 0");
  if (s > 1.0) throw DomainError("theorem_lower_bound: s exceeds c1 = 1 (the constants require s <= 1)");
  const double shifted = beta + q_shift(beta, s);
  if (shifted >= kLog2) return BoundValue::undefined();
  const double v = critical_h_hom(shifted);
  if (std::isinf(v)) return BoundValue::undefined();
  return BoundValue::of(v);
}

double contact_exponent(double beta, double h) {
  return beta + std::log1p(-0.5 * std::sqrt(one_minus_decay(h)));
}

double h0_of_beta(double beta, double s) {
  const double q = q_shift(beta, s);
  if (!(beta + q < kLog2)) throw DomainError("h0_of_beta: beta + q(s) >= log 2, no finite root");
  auto f = [&](double h) { return contact_exponent(beta, h) + q; };
  if (f(0.0) <= 0.0) return 0.0;
  double hi = 1.0;
  while (f(hi) > 0.0) {
    hi *= 2.0;
    if (hi > 1e300) throw DomainError("h0_of_beta: root not bracketed");
  }
  return bisect(f, 0.0, hi, false);
}

PinningBounds pinning_bounds(double s, const DisorderSpec& spec) {
  if (!(s >= 0.0)) throw DomainError("pinning_bounds: s must be >= 0");
  return {s, s * s / (5.0 * 65536.0), spec.cumulant(s)};
}

CurvePoint curve_point(double beta, double s, const DisorderSpec& spec) {
  CurvePoint p;
  p.beta = beta;
  p.s = s;
  p.hc0 = critical_h_hom(beta);
  p.h_ann = annealed_critical_h(beta, s, spec);
  p.q_s = q_shift(beta, s);
  p.beta_ann = beta_ann(s, spec);
  try {
    p.m_s = theorem_lower_bound(beta, s);
  } catch (const DomainError&) {
    p.m_s = BoundValue::failed();
  }
  if (p.m_s.defined()) p.h0 = h0_of_beta(beta, s);
  return p;
}

}  // namespace pinning
