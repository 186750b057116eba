#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/homogeneous.hpp"
#include "pinning/quenched.hpp"

using namespace pinning;

namespace {
const auto kRad = DisorderSpec::scaled_rademacher();
const auto kGauss = DisorderSpec::gaussian_unit();
}  // namespace

TEST_CASE("constrained partition of the free walk is the return probability") {
  const auto d = constant_disorder(40);
  auto zc = constrained_log_partitions({0.0, 0.0, 0.0}, d, 15);
  CHECK(zc[0] == 0.0);
  for (int k = 1; k <= 15; ++k) {
    CAPTURE(k);
    CHECK(std::abs(std::exp(zc[k]) / oracle::prob_at_zero(2 * k) - 1.0) <= 1e-14);
  }
  for (long n : {1L, 2L, 7L, 30L, 1001L}) CHECK(std::abs(partition_free({0.0, 0.0, 0.0}, constant_disorder(n), n)) <= 1e-13);
}

TEST_CASE("two-step instance by hand") {
  const auto d = constant_disorder(2);
  CHECK(partition_free({1.0, 0.0, 0.0}, d, 2) == doctest::Approx(std::log((2.0 * std::exp(1.0) + 2.0) / 4.0)).epsilon(1e-15));
  // both steps of (-1, 0) and of (-1, -2) count as below: each gets e^{-4h}
  const double h = 0.3, b = 0.5;
  const double z = (1.0 + std::exp(b) + std::exp(b - 4 * h) + std::exp(-4 * h)) / 4.0;
  CHECK(partition_free({b, h, 0.0}, d, 2) == doctest::Approx(std::log(z)).epsilon(1e-15));
  CHECK(brute_force_partition({b, h, 0.0}, d, 2) == doctest::Approx(std::log(z)).epsilon(1e-15));
}

TEST_CASE("renewal recursion agrees with exhaustive enumeration") {
  std::mt19937_64 gen(2024);
  std::uniform_real_distribution<double> ub(0.0, 1.2), uh(0.0, 1.0), us(0.0, 1.5);
  for (int trial = 0; trial < 60; ++trial) {
    const long n = 1 + trial % 16;
    ModelParams p{ub(gen), trial % 9 == 0 ? kInf : uh(gen), us(gen)};
    const auto d = make_disorder(trial % 2 ? kRad : kGauss, n, 100 + trial);
    const double bf = brute_force_partition(p, d, n);
    const double rn = partition_free(p, d, n);
    CAPTURE(n);
    CAPTURE(p.h);
    CHECK(oracle::rel(rn, bf) <= 1e-10);
    CHECK(oracle::rel(oracle::enumerate_paths(p, d, static_cast<int>(n), {}).log_z, bf) <= 1e-10);
  }
}

TEST_CASE("s = 0 ignores the disorder") {
  const auto d = make_disorder(kGauss, 3000, 9);
  const auto c = constant_disorder(3000);
  for (double h : {0.0, 0.1, kInf}) {
    auto a = partition_constrained({0.4, h, 0.0}, d, 3000);
    auto b = partition_constrained({0.4, h, 0.0}, c, 3000);
    CHECK(a.log_zc == b.log_zc);
    CHECK(a.log_zf == b.log_zf);
    CHECK(a.log_zf / 3000.0 == doctest::Approx(free_energy_hom_finite(0.4, h, 3000)).epsilon(1e-14));
  }
}

TEST_CASE("free and constrained values are ordered and close") {
  const auto d = make_disorder(kRad, 4000, 5);
  ModelParams p{0.5, 0.2, 0.5};
  auto t = partition_constrained(p, d, 4000);
  CHECK(t.log_zf >= t.log_zc.back());
  CHECK(t.log_zf - t.log_zc.back() <= 2.0 * std::log(4000.0));
  // lower bound from a single path class: stay positive all the way
  CHECK(t.log_zf >= std::log(0.5 * return_tail(2000)) - 1e-12);
  CHECK(std::abs(free_from_constrained(t.log_zc, p.h, 4000) - t.log_zf) <= 1e-12);
}

TEST_CASE("monotone in h and nonnegative at h = 0, s = 0") {
  const auto d = make_disorder(kRad, 2000, 77);
  double prev = INFINITY;
  for (double h = 0.0; h <= 1.0; h += 0.1) {
    const double v = partition_free({0.3, h, 0.8}, d, 2000);
    CHECK(v <= prev);
    prev = v;
  }
  CHECK(partition_free({0.3, 0.0, 0.0}, d, 2000) >= 0.0);
  CHECK(partition_constrained({0.3, 0.0, 0.0}, d, 2000).log_zc.back() >= std::log(oracle::prob_at_zero(2000)));
}

TEST_CASE("contact marginals of the free walk") {
  const long n = 40;
  auto prof = contact_profile({0.0, 0.0, 0.0}, constant_disorder(n), n);
  double expect = 0.0;
  for (long k = 0; k <= n / 2; ++k) {
    const double ref = oracle::prob_at_zero(2 * k) * oracle::prob_at_zero(n - 2 * k) / oracle::prob_at_zero(n);
    CHECK(std::abs(prof.marginals[k] - ref) <= 1e-13 * ref);
    if (k > 0) expect += ref;
  }
  CHECK(prof.expected_contacts == doctest::Approx(expect).epsilon(1e-13));
}

TEST_CASE("contact expectation is the beta derivative of log Zc") {
  const long n = 2000;
  const auto d = make_disorder(kRad, n, 31);
  for (ModelParams p : {ModelParams{0.4, 0.1, 0.0}, ModelParams{0.3, 0.05, 0.7}}) {
    const double eps = 1e-5;
    auto hi = partition_constrained({p.beta + eps, p.h, p.s}, d, n, false).log_zc.back();
    auto lo = partition_constrained({p.beta - eps, p.h, p.s}, d, n, false).log_zc.back();
    auto prof = contact_profile(p, d, n);
    double weighted = 0.0;
    for (long k = 1; k <= n / 2; ++k) weighted += prof.marginals[k] * (1.0 + p.s * d.at(2 * k));
    CHECK((hi - lo) / (2 * eps) == doctest::Approx(weighted).epsilon(1e-6));
    CHECK(partition_constrained(p, d, n).contact_expectation == doctest::Approx(prof.expected_contacts).epsilon(1e-12));
  }
}

TEST_CASE("contact fraction in localized and delocalized phases") {
  const auto d = make_disorder(kRad, 40000, 1);
  const double loc2 = contact_fraction({0.69, 0.0, 0.0}, d, 20000);
  const double loc4 = contact_fraction({0.69, 0.0, 0.0}, d, 40000);
  CHECK(loc2 > 0.1);
  CHECK(std::abs(loc4 - loc2) < 0.01);
  const double del2 = contact_fraction({0.2, 0.5, 0.0}, d, 20000);
  const double del4 = contact_fraction({0.2, 0.5, 0.0}, d, 40000);
  CHECK(del4 < del2);
  CHECK(del4 * 40000 < 50.0);
  CHECK(contact_fraction({0.5, 0.1, 0.5}, d, 1000) <= 0.5);
}

TEST_CASE("quenched estimates") {
  auto e0 = free_energy_quenched({0.4, 0.1, 0.0}, kRad, 4000, 5, 3);
  CHECK(e0.std_err == 0.0);
  CHECK(e0.mean == doctest::Approx(free_energy_hom_finite(0.4, 0.1, 4000)).epsilon(1e-13));

  ModelParams p{0.5, 0.2, 0.6};
  auto q = free_energy_quenched(p, kRad, 4000, 40, 3);
  CHECK(q.replicas == 40);
  CHECK(q.std_err > 0.0);
  // Jensen
  CHECK(q.mean <= free_energy_annealed(p, kRad, 4000) + 3.0 * q.std_err);
  // thread count does not change anything
  auto q4 = free_energy_quenched(p, kRad, 4000, 40, 3, FreeEnergyMode::free, 4);
  CHECK(q4.mean == q.mean);
  CHECK(q4.std_err == q.std_err);
  CHECK_THROWS_AS(free_energy_quenched(p, kRad, 4000, 0, 3), DomainError);
}

TEST_CASE("annealed identity") {
  for (double s : {0.0, 0.5, 1.0}) {
    ModelParams p{0.4, 0.3, s};
    const double b = annealed_exponent(0.4, s, kRad);
    CHECK(std::abs(free_energy_annealed(p, kRad, 5000) - free_energy_hom_finite(b, 0.3, 5000)) <= 1e-12);
  }
  // the finite-n homogeneous value approaches the closed form
  CHECK(std::abs(free_energy_hom_finite(0.6, 0.1, 100000) - free_energy_hom(0.6, 0.1)) < 1e-3);
}

TEST_CASE("delocalized finite-size values approach 0") {
  ModelParams p{0.3, 1.0, 0.5};
  const double a = free_energy_quenched(p, kRad, 4000, 4, 8).mean;
  const double b = free_energy_quenched(p, kRad, 16000, 4, 8).mean;
  CHECK(a < 0.0);
  CHECK(std::abs(b) < std::abs(a));
}

TEST_CASE("bracket argument validation") {
  BracketOptions opt;
  opt.n = 2000;
  opt.threshold = 0.0;
  CHECK_THROWS_AS(bracket_critical_h(0.3, 0.0, kRad, opt), DomainError);
  opt.threshold = 1e-3;
  opt.n = 2001;
  CHECK_THROWS_AS(bracket_critical_h(0.3, 0.0, kRad, opt), SizeError);
}

TEST_CASE("bracket at moderate size contains hc0 before clamping") {
  BracketOptions opt;
  opt.n = 20000;
  opt.threshold = 2e-3;
  auto b = bracket_critical_h(0.4, 0.0, kRad, opt);
  const double hc = critical_h_hom(0.4);
  CHECK_FALSE(b.divergent);
  CHECK(b.raw_h_lo <= hc);
  CHECK(b.raw_h_hi >= hc);
  CHECK(b.h_lo <= hc);
  CHECK(b.h_hi >= hc);
  CHECK(b.h_lo <= b.h_hi);

  opt.n = 4000;
  auto dv = bracket_critical_h(0.7, 0.0, kRad, opt);
  CHECK(dv.divergent);
  CHECK(dv.h_hi == kInf);
}
