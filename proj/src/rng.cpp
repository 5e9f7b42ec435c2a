// SPDX-License-Identifier: Apache-2.0
#include "bigcn/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "bigcn/core.hpp"

namespace bigcn {

std::uint64_t splitmix64_finalize(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

CounterRng::CounterRng(std::uint64_t seed, std::uint64_t stream)
    : key_(seed * 0x9E3779B97F4A7C15ULL ^ splitmix64_finalize(stream)) {}

std::uint64_t CounterRng::next_u64() { return splitmix64_finalize(key_ ^ counter_++); }

double CounterRng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

std::uint64_t CounterRng::below(std::uint64_t n) {
  if (n == 0) throw Error("CounterRng::below: n must be positive");
  if (n == 1) return 0;
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x = next_u64();
  while (x >= limit) x = next_u64();
  return x % n;
}

double CounterRng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double r = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(angle);
  has_spare_ = true;
  return r * std::cos(angle);
}

CounterRng CounterRng::split(std::uint64_t child) const {
  CounterRng out(0, 0);
  out.key_ = splitmix64_finalize(key_ ^ splitmix64_finalize(child + 0x632BE59BD9B4E019ULL));
  return out;
}

std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const auto j = static_cast<std::size_t>(rng.below(i));
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace bigcn
