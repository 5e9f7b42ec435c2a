// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

namespace bigcn {

/// Named sub-streams. Each consumer of randomness in an experiment draws from
/// its own stream so that changing one protocol never shifts another.
enum class Stream : std::uint64_t {
  noise_level = 1,
  noise_rate = 2,
  structure_mistakes = 3,
  feature_rate = 4,
  sbm_graph = 10,
  sbm_features = 11,
  sbm_masks = 12,
  edge_split = 13,
  init = 20,
  dropout = 21,
  negatives = 22,
  test_fixture = 99,
};

/// Counter-based generator. The k-th output of stream s under seed x is
///
///   splitmix64_finalize(x * 0x9E3779B97F4A7C15 ^ splitmix64_finalize(s) ^ k)
///
/// so any draw can be recomputed from (seed, stream, counter) alone, in any
/// language, without replaying earlier draws.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, Stream stream) : CounterRng(seed, static_cast<std::uint64_t>(stream)) {}
  CounterRng(std::uint64_t seed, std::uint64_t stream);

  std::uint64_t next_u64();
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  /// Uniform integer in [0, n). Rejection sampling, so unbiased.
  std::uint64_t below(std::uint64_t n);
  /// Standard normal via Box-Muller; the second variate is cached.
  double normal();
  bool bernoulli(double p) { return uniform() < p; }

  std::uint64_t counter() const { return counter_; }

  /// Derives an independent generator for a sub-task, e.g. one run of a sweep.
  CounterRng split(std::uint64_t child) const;

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

std::uint64_t splitmix64_finalize(std::uint64_t z);

/// Uniformly random permutation of 0..n-1 (Fisher-Yates).
std::vector<std::size_t> random_permutation(std::size_t n, CounterRng& rng);

}  // namespace bigcn
