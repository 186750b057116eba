#include <doctest.h>

#include <cmath>
#include <random>

#include "oracles.hpp"
#include "pinning/errors.hpp"
#include "pinning/path.hpp"
#include "pinning/quenched.hpp"

using namespace pinning;

namespace {
const auto kRad = DisorderSpec::scaled_rademacher();
}

TEST_CASE("free walk endpoint is binomial") {
  for (long n : {1L, 2L, 9L, 30L}) {
    auto law = endpoint_distribution({0.0, 0.0, 0.0}, constant_disorder(n), n);
    for (long x = -n; x <= n; ++x) {
      const double ref = (n + x) % 2 ? 0.0 : oracle::binomial_prob(static_cast<int>(n), static_cast<int>((n + x) / 2));
      CHECK(std::abs(law.at(x) - ref) <= 1e-14);
    }
    CHECK(law.at(n + 1) == 0.0);
    CHECK(std::abs(law.log_z) <= 1e-14);
  }
}

TEST_CASE("path DP agrees with exhaustive enumeration") {
  std::mt19937_64 gen(8);
  std::uniform_real_distribution<double> ub(0.0, 1.0), uh(0.0, 0.8), us(0.0, 1.0);
  for (int trial = 0; trial < 40; ++trial) {
    const long n = 1 + trial % 16;
    ModelParams p{ub(gen), trial % 7 == 3 ? kInf : uh(gen), us(gen)};
    const auto d = make_disorder(kRad, n, 500 + trial);
    std::vector<int> levels{-1, 0, 1, 3};
    auto ref = oracle::enumerate_paths(p, d, static_cast<int>(n), levels);
    auto law = endpoint_distribution(p, d, n);
    CAPTURE(n);
    CHECK(oracle::rel(law.log_z, ref.log_z) <= 1e-12);
    CHECK(std::abs(law.total() - 1.0) <= 1e-12);
    for (long x = -n; x <= n; ++x) {
      const auto it = ref.endpoint.find(static_cast<int>(x));
      CHECK(std::abs(law.at(x) - (it == ref.endpoint.end() ? 0.0 : it->second)) <= 1e-12);
    }
    for (int k : {0, 1, 3}) CHECK(std::abs(above_level_fraction(p, d, n, k) - ref.above[k]) <= 1e-12);
  }
}

TEST_CASE("path DP agrees with the renewal recursion") {
  for (long n : {100L, 999L, 2000L}) {
    const auto d = make_disorder(kRad, n, n);
    ModelParams p{0.45, 0.15, 0.8};
    CHECK(oracle::rel(path_log_partition(p, d, n), partition_free(p, d, n)) <= 1e-10);
  }
}

TEST_CASE("symmetric case at beta = h = 0") {
  const long n = 30;
  const auto d = constant_disorder(n);
  ModelParams p{0.0, 0.0, 0.0};
  // E #{S_i > 0} = (n - E #{S_i = 0}) / 2 by symmetry
  double zeros = 0.0;
  for (long i = 2; i <= n; i += 2) zeros += oracle::prob_at_zero(static_cast<int>(i));
  CHECK(above_level_fraction(p, d, n, 0) == doctest::Approx((1.0 - zeros / n) / 2.0).epsilon(1e-13));
  CHECK(above_level_fraction(p, constant_disorder(4000), 4000, 0) ==
        doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("above-level fraction in the delocalized phase") {
  const auto d = make_disorder(kRad, 4000, 2);
  ModelParams p{0.2, 0.2, 0.0};
  const double f1 = above_level_fraction(p, d, 1000, 10);
  const double f2 = above_level_fraction(p, d, 2000, 10);
  const double f4 = above_level_fraction(p, d, 4000, 10);
  CHECK(f1 < f2);
  CHECK(f2 < f4);
  CHECK(f4 > 0.8);
  CHECK(above_level_fraction(p, d, 1000, 1000) == 0.0);
  double prev = 1.0;
  for (long k = 0; k < 50; k += 5) {
    const double v = above_level_fraction(p, d, 1000, k);
    CHECK(v <= prev);
    prev = v;
  }
}

TEST_CASE("tail profile") {
  const long n = 2000;
  const auto d = make_disorder(kRad, n, 3);
  std::vector<long> levels;
  for (long l = 0; l <= 44; l += 4) levels.push_back(l);
  auto del = tail_decay_profile({0.0, 1.0, 0.0}, d, n, levels);
  CHECK(del.tails.front() > 0.9);
  CHECK(del.tails.back() > 0.1);
  CHECK(std::abs(del.slope) < 0.05);

  auto loc = tail_decay_profile({0.69, 0.0, 0.0}, d, n, levels);
  CHECK(loc.slope < 0.0);
  MESSAGE("localized tail slope " << loc.slope);
  for (std::size_t i = 1; i < loc.tails.size(); ++i) CHECK(loc.tails[i] <= loc.tails[i - 1]);

  auto far = tail_decay_profile({0.3, 0.1, 0.0}, d, 100, {100, 150});
  CHECK(far.tails[0] == 0.0);
  CHECK(far.tails[1] == 0.0);
}

TEST_CASE("size cap") {
  const auto d = constant_disorder(kPathMaxN + 2);
  CHECK_THROWS_AS(endpoint_distribution({0.1, 0.1, 0.0}, d, kPathMaxN + 1), SizeError);
  CHECK_THROWS_AS(above_level_fraction({0.1, 0.1, 0.0}, d, kPathMaxN + 1, 3), SizeError);
  CHECK_THROWS_AS(endpoint_distribution({0.1, 0.1, 0.0}, constant_disorder(10), 20), SizeError);
}
