// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"

namespace bigcn {

enum class NoiseCase { noise_level, noise_rate, structure_mistakes, feature_rate };

struct NoiseSpec {
  NoiseCase kind = NoiseCase::noise_level;
  double parameter = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

std::string to_string(NoiseCase c);
NoiseCase parse_noise_case(const std::string& s);

/// X + N with N_ij ~ N(0, level^2).
DenseMatrix apply_noise_level(const DenseMatrix& x, double level, std::uint64_t seed);

/// Each row is selected with probability `rate`; selected rows get
/// N(0, v_i^2) noise with v_i ~ Uniform(0, 1).
DenseMatrix apply_noise_rate(const DenseMatrix& x, double rate, std::uint64_t seed);

/// Rows chosen by apply_noise_rate for the same (n, rate, seed).
std::vector<bool> noise_rate_mask(Index n, double rate, std::uint64_t seed);

/// Toggles each unordered pair {i, j}, i < j, independently with
/// probability `ratio`. Applying twice with the same seed is the identity.
Graph apply_structure_mistakes(const Graph& g, double ratio, std::uint64_t seed);

/// Number of pairs apply_structure_mistakes toggles for (n, ratio, seed).
std::vector<std::pair<Index, Index>> structure_flips(Index n, double ratio, std::uint64_t seed);

/// Order-preserving uniform subset of ceil(rate * m) columns.
DenseMatrix apply_feature_rate(const DenseMatrix& x, double rate, std::uint64_t seed);
std::vector<Index> feature_rate_columns(Index m, double rate, std::uint64_t seed);

/// Feature-side cases only; structure_mistakes is applied to the graph.
DenseMatrix apply_feature_noise(const DenseMatrix& x, const NoiseSpec& spec);

}  // namespace bigcn
