// SPDX-License-Identifier: Apache-2.0
#include <algorithm>
#include <cmath>

#include "bigcn/rng.hpp"
#include "doctest.h"

using namespace bigcn;

TEST_CASE("splitmix64 finalizer reference values") {
  // First two outputs of the published splitmix64 generator seeded with 0.
  CHECK(splitmix64_finalize(0) == 0xE220A8397B1DCDAFULL);
  CHECK(splitmix64_finalize(0x9E3779B97F4A7C15ULL) == 0x6E789E6AA1B965F4ULL);
}

TEST_CASE("streams are deterministic and independent") {
  CounterRng a(5, Stream::noise_level);
  CounterRng b(5, Stream::noise_level);
  CounterRng c(5, Stream::noise_rate);
  CounterRng d(6, Stream::noise_level);
  int same_c = 0;
  int same_d = 0;
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    same_c += x == c.next_u64();
    same_d += x == d.next_u64();
  }
  CHECK(same_c == 0);
  CHECK(same_d == 0);
  CHECK(a.counter() == 100);
  const CounterRng parent(1, Stream::negatives);
  CounterRng s1 = parent.split(3);
  CounterRng s2 = parent.split(3);
  CounterRng s3 = parent.split(4);
  CHECK(s1.next_u64() == s2.next_u64());
  CHECK(s1.next_u64() != s3.next_u64());
}

TEST_CASE("distribution moments") {
  CounterRng r(7, Stream::test_fixture);
  const int n = 200000;
  double su = 0.0, su2 = 0.0, sn = 0.0, sn2 = 0.0;
  double umin = 1.0, umax = 0.0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    umin = std::min(umin, u);
    umax = std::max(umax, u);
    su += u;
    su2 += u * u;
    const double z = r.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(umin >= 0.0);
  CHECK(umax < 1.0);
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(su2 / n - (su / n) * (su / n) == doctest::Approx(1.0 / 12.0).epsilon(0.02));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("below is unbiased and in range") {
  CounterRng r(8, Stream::test_fixture);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) {
    const auto v = r.below(7);
    REQUIRE(v < 7);
    ++counts[v];
  }
  double chi = 0.0;
  for (int c : counts) chi += (c - 10000.0) * (c - 10000.0) / 10000.0;
  CHECK(chi < 22.46);  // chi-square, 6 dof, p = 0.001
  CHECK_THROWS(r.below(0));
}

TEST_CASE("random permutation") {
  CounterRng r(9, Stream::test_fixture);
  auto p = random_permutation(50, r);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = 0; i < 50; ++i) CHECK(sorted[i] == i);
}
