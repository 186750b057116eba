#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/model.hpp"
#include "pinning/rng.hpp"

using namespace pinning;

TEST_CASE("first-return law matches path enumeration") {
  CHECK(return_prob(1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(return_prob(2) == doctest::Approx(0.125).epsilon(1e-15));
  CHECK(return_prob(3) == doctest::Approx(0.0625).epsilon(1e-15));
  for (int n = 1; n <= 9; ++n) {
    CAPTURE(n);
    CHECK(std::abs(return_prob(n) - oracle::first_return_by_enumeration(n)) <= 1e-15);
  }
}

TEST_CASE("first-return law matches the closed binomial form") {
  // P(tau = 2n) = C(2n, n) / ((2n - 1) 4^n)
  for (long n = 1; n <= 400; n += 7) {
    const double ref = oracle::binomial_prob(static_cast<int>(2 * n), static_cast<int>(n)) / (2.0 * n - 1.0);
    CAPTURE(n);
    CHECK(std::abs(return_prob(n) / ref - 1.0) <= 1e-12);
  }
}

TEST_CASE("tail matches a zero-avoiding DP") {
  for (int n : {1, 2, 5, 25, 50}) {
    CAPTURE(n);
    CHECK(std::abs(return_tail(n) / oracle::zero_avoiding_probability(2 * n) - 1.0) <= 1e-13);
  }
  // P(tau > 2n) = P(S_{2n} = 0)
  for (int n : {100, 1000, 20000}) {
    CHECK(std::abs(return_tail(n) / oracle::prob_at_zero(2 * n) - 1.0) <= 1e-11);
  }
}

TEST_CASE("tail follows 1/sqrt(pi n)") {
  for (long n : {10000L, 1000000L, 100000000L}) {
    const double lead = 1.0 / std::sqrt(M_PI * n);
    CHECK(std::abs(return_tail(n) / lead - 1.0) <= 1.0 / (4.0 * n));
  }
  CHECK(std::abs(std::exp(log_return_tail(1234567)) - return_tail(1234567)) <= 1e-15);
  CHECK(std::abs(std::exp(log_return_prob(777)) - return_prob(777)) <= 1e-18);
}

TEST_CASE("law is strictly decreasing and nonnegative") {
  for (long n = 1; n < 5000; ++n) {
    REQUIRE(return_prob(n + 1) < return_prob(n));
    REQUIRE(return_prob(n + 1) > 0.0);
  }
}

TEST_CASE("bad lengths are rejected") {
  CHECK_THROWS_AS(return_prob(0), DomainError);
  CHECK_THROWS_AS(return_prob(-3), DomainError);
  CHECK_THROWS_AS(WalkKernel(7), SizeError);
}

TEST_CASE("walk kernel normalization and generating function") {
  for (long t : {2L, 10L, 1000L, 200000L}) {
    WalkKernel k(t);
    double s = 0.0;
    for (long n = 1; n <= k.half_len(); ++n) s += k.return_probs[n];
    CAPTURE(t);
    CHECK(std::abs(s + k.tail[k.half_len()] - 1.0) <= 1e-14);
    CHECK(k.tail[0] == 1.0);
    CHECK(k.return_probs[0] == 0.0);
  }
  WalkKernel k(2000);
  for (double z : {0.1, 0.5, 0.9, 0.99}) {
    const double exact = 1.0 - std::sqrt(1.0 - z * z);
    const double g = k.generating_function(z);
    CAPTURE(z);
    CHECK(g <= exact + 1e-15);
    CHECK(exact - g <= k.remainder_bound(z) + 1e-14);
  }
  CHECK(std::abs(k.generating_function(1.0) - (1.0 - k.tail[k.half_len()])) <= 1e-14);
}

TEST_CASE("excursion weight") {
  CHECK(excursion_weight(0.0, 1) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(excursion_weight(kInf, 1) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(excursion_weight(0.25, 3) == doctest::Approx(0.0625 * (1.0 + std::exp(-3.0)) / 2.0).epsilon(1e-14));
  for (double h = 0.0; h < 1.0; h += 0.1) CHECK(excursion_weight(h + 0.1, 5) < excursion_weight(h, 5));
}

TEST_CASE("model parameter validation") {
  CHECK_NOTHROW(ModelParams{0.3, 0.1, 0.5}.validate());
  CHECK_NOTHROW(ModelParams{0.3, kInf, 0.5}.validate());
  CHECK_THROWS_AS((ModelParams{-0.1, 0.1, 0.5}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{0.1, -0.1, 0.5}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{0.1, 0.1, -0.5}.validate()), DomainError);
  CHECK_THROWS_AS((ModelParams{NAN, 0.1, 0.5}.validate()), DomainError);
}

TEST_CASE("scaled Rademacher law") {
  auto r = DisorderSpec::scaled_rademacher();
  CHECK(r.mean() == 0.0);
  CHECK(r.prob_positive() == 0.5);
  CHECK(r.positive_part_mean() == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(r.cumulant(0.3) == doctest::Approx(std::log(std::cosh(0.6))).epsilon(1e-14));
  auto f = make_disorder(r, 10000, 7);
  std::set<double> seen(f.values.begin(), f.values.end());
  CHECK(seen == std::set<double>{-2.0, 2.0});
}

TEST_CASE("gaussian law and sample moments") {
  auto g = DisorderSpec::gaussian_unit();
  CHECK(g.cumulant(0.7) == doctest::Approx(0.245).epsilon(1e-14));
  CHECK(g.positive_part_mean() == doctest::Approx(1.0 / std::sqrt(2.0 * M_PI)).epsilon(1e-14));
  const std::size_t n = 100000;
  auto f = make_disorder(g, n, 11);
  double m = 0.0, v = 0.0;
  for (double x : f.values) m += x;
  m /= n;
  for (double x : f.values) v += (x - m) * (x - m);
  v /= n - 1;
  CHECK(std::abs(m) < 4.0 / std::sqrt(double(n)));
  CHECK(std::abs(v - 1.0) < 4.0 * std::sqrt(2.0 / n));
}

TEST_CASE("table law reproducing the Rademacher law") {
  auto t = DisorderSpec::table({-2.0, 2.0}, {0.5, 0.5});
  auto r = DisorderSpec::scaled_rademacher();
  CHECK(t.mean() == r.mean());
  CHECK(t.variance() == doctest::Approx(r.variance()).epsilon(1e-15));
  CHECK(t.prob_positive() == r.prob_positive());
  CHECK(t.positive_part_mean() == doctest::Approx(r.positive_part_mean()).epsilon(1e-15));
  for (double l : {-1.0, 0.1, 0.5, 2.0}) CHECK(t.cumulant(l) == doctest::Approx(r.cumulant(l)).epsilon(1e-14));
  auto f = make_disorder(t, 40000, 3);
  long pos = 0;
  for (double x : f.values) {
    REQUIRE((x == 2.0 || x == -2.0));
    pos += x > 0;
  }
  CHECK(std::abs(pos / 40000.0 - 0.5) < 4.0 * 0.5 / 200.0);
}

TEST_CASE("invalid tables") {
  CHECK_THROWS_AS(DisorderSpec::table({1.0, 2.0}, {0.5, 0.5}), InvalidSpec);  // mean != 0
  CHECK_THROWS_AS(DisorderSpec::table({-1.0, 1.0}, {0.0, 0.0}), InvalidSpec);
  CHECK_THROWS_AS(DisorderSpec::table({-1.0, 1.0}, {-0.5, 1.5}), InvalidSpec);
  CHECK_THROWS_AS(DisorderSpec::table({}, {}), InvalidSpec);
  CHECK_THROWS_AS(DisorderSpec::table({-1.0}, {0.5, 0.5}), InvalidSpec);
}

TEST_CASE("table weights are normalized") {
  auto t = DisorderSpec::table({-1.0, 1.0}, {0.6, 0.6});
  CHECK(t.probs()[0] == 0.5);
  CHECK(t.probs()[1] == 0.5);
}

TEST_CASE("disorder regeneration is deterministic") {
  for (auto spec : {DisorderSpec::scaled_rademacher(), DisorderSpec::gaussian_unit(),
                    DisorderSpec::table({-1.0, 0.0, 3.0}, {0.6, 0.2, 0.2})}) {
    auto a = make_disorder(spec, 5000, 42);
    auto b = make_disorder(spec, 5000, 42);
    auto c = make_disorder(spec, 5000, 43);
    CHECK(a.values == b.values);
    CHECK(a.values != c.values);
    // prefix property: a shorter field is a prefix of a longer one
    auto d = make_disorder(spec, 100, 42);
    CHECK(std::equal(d.values.begin(), d.values.end(), a.values.begin()));
    CHECK(spec.sample(mix64(42), 17) == a.values[17]);
  }
}

TEST_CASE("constant disorder") {
  auto z = constant_disorder(5, 0.0);
  CHECK(z.size() == 5);
  CHECK(z.at(1) == 0.0);
  CHECK(z.at(5) == 0.0);
}
