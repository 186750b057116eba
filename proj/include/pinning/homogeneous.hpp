#pragma once

#include <optional>

#include "pinning/model.hpp"

namespace pinning {

/// Tolerances shared by every bisection in the library.
inline constexpr double kBisectTol = 1e-12;
inline constexpr int kBisectMaxIter = 200;

/// Ratio of the excursion generating-function series evaluated at z:
/// x(z) = (e^beta / 2) (2 - sqrt(1 - z^2) - sqrt(1 - z^2 e^{-4h})).
/// The homogeneous model is localized iff x(1) > 1.
double theta_term(double beta, double h, double z);

/// Homogeneous free energy Phi^0(beta, h) = -log z*, where x(z*) = 1.
double free_energy_hom(double beta, double h);

/// h_c^0(beta) = -(1/4) log(1 - 4 (1 - e^{-beta})^2) for beta < log 2, +inf otherwise.
double critical_h_hom(double beta);

/// beta + log E exp(beta s zeta): the reward of the disorder-averaged model.
double annealed_exponent(double beta, double s, const DisorderSpec& spec);

/// Annealed critical curve h_c^0(annealed_exponent).
double annealed_critical_h(double beta, double s, const DisorderSpec& spec);

/// Root of beta + log E exp(beta s zeta) = log 2 on [0, log 2].
double beta_ann(double s, const DisorderSpec& spec);

/// q(s) = beta^2 s^2 / (5 * 2^14), the improvement exponent of the lower bound.
double q_shift(double beta, double s);

/// Outcome of a bound that only exists on part of parameter space.
struct BoundValue {
  enum class Status { value, out_of_domain, error };
  Status status = Status::out_of_domain;
  double value = 0.0;

  bool defined() const { return status == Status::value; }
  static BoundValue of(double v) { return {Status::value, v}; }
  static BoundValue undefined() { return {}; }
  static BoundValue failed() { return {Status::error, 0.0}; }
};

/**
 * Lower bound m^s(beta) on the disordered critical curve,
 * -(1/4) log(1 - 4 (1 - e^{-beta - q(s)})^2).
 *
 * The explicit constants assume P(zeta > 0) = 1/2 and E[zeta 1{zeta>0}] = 1,
 * with s <= 1; s > 1 throws DomainError. Returns `undefined` when
 * beta + q(s) >= log 2.
 */
BoundValue theorem_lower_bound(double beta, double s);

/// Solves log(e^beta (1 - sqrt(1 - e^{-4 h0}) / 2)) = -q(s) for h0 by bisection.
/// Throws DomainError when beta + q(s) >= log 2 (no finite root).
double h0_of_beta(double beta, double s);

/// log(e^beta (1 - sqrt(1 - e^{-4h}) / 2)); the per-contact exponent whose sign
/// decides homogeneous localization.
double contact_exponent(double beta, double h);

struct PinningBounds {
  double s = 0.0;
  double lower = 0.0;
  double upper_annealed = 0.0;
};

/// Pure pinning critical mean u_c(s): lower = s^2 / (5 * 2^16) (valid for
/// s <= log 2) and the annealed value log E exp(s zeta).
PinningBounds pinning_bounds(double s, const DisorderSpec& spec);

/// One row of a (beta, s) curve sweep.
struct CurvePoint {
  double beta = 0.0;
  double s = 0.0;
  double hc0 = 0.0;
  double h_ann = 0.0;
  BoundValue m_s;
  double q_s = 0.0;
  double beta_ann = 0.0;
  std::optional<double> h0;
};

CurvePoint curve_point(double beta, double s, const DisorderSpec& spec);

}  // namespace pinning
