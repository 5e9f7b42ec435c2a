// SPDX-License-Identifier: Apache-2.0
#include "bigcn/noise.hpp"

#include <algorithm>
#include <cmath>
#include <iterator>
#include <set>

#include "bigcn/rng.hpp"

namespace bigcn {

void NoiseSpec::validate() const {
  const double v = parameter;
  switch (kind) {
    case NoiseCase::noise_level:
      if (!(v >= 0.0 && v <= 0.9)) throw Error("noise_level must be in [0, 0.9]");
      break;
    case NoiseCase::noise_rate:
      if (!(v >= 0.0 && v <= 1.0)) throw Error("noise_rate must be in [0, 1]");
      break;
    case NoiseCase::structure_mistakes:
      if (!(v >= 0.0 && v <= 0.015)) throw Error("structure_mistakes ratio must be in [0, 0.015]");
      break;
    case NoiseCase::feature_rate:
      if (!(v > 0.0 && v <= 1.0)) throw Error("feature_rate must be in (0, 1]");
      break;
  }
}

std::string to_string(NoiseCase c) {
  switch (c) {
    case NoiseCase::noise_level: return "noise_level";
    case NoiseCase::noise_rate: return "noise_rate";
    case NoiseCase::structure_mistakes: return "structure_mistakes";
    case NoiseCase::feature_rate: return "feature_rate";
  }
  return "unknown";
}

NoiseCase parse_noise_case(const std::string& s) {
  if (s == "noise_level") return NoiseCase::noise_level;
  if (s == "noise_rate") return NoiseCase::noise_rate;
  if (s == "structure_mistakes") return NoiseCase::structure_mistakes;
  if (s == "feature_rate") return NoiseCase::feature_rate;
  throw Error("unknown noise case '" + s + "'");
}

DenseMatrix apply_noise_level(const DenseMatrix& x, double level, std::uint64_t seed) {
  if (level < 0.0) throw Error("apply_noise_level: level must be >= 0");
  if (level == 0.0) return x;
  CounterRng rng(seed, Stream::noise_level);
  DenseMatrix out = x;
  for (Index i = 0; i < out.rows(); ++i)
    for (Index j = 0; j < out.cols(); ++j) out(i, j) += level * rng.normal();
  return out;
}

std::vector<bool> noise_rate_mask(Index n, double rate, std::uint64_t seed) {
  CounterRng rng(seed, Stream::noise_rate);
  std::vector<bool> mask(static_cast<std::size_t>(n));
  for (Index i = 0; i < n; ++i) mask[static_cast<std::size_t>(i)] = rng.bernoulli(rate);
  return mask;
}

DenseMatrix apply_noise_rate(const DenseMatrix& x, double rate, std::uint64_t seed) {
  if (!(rate >= 0.0 && rate <= 1.0)) throw Error("apply_noise_rate: rate must be in [0, 1]");
  const std::vector<bool> mask = noise_rate_mask(x.rows(), rate, seed);
  // Variances and noise come from a child stream so the mask alone is
  // reproducible from noise_rate_mask.
  CounterRng rng = CounterRng(seed, Stream::noise_rate).split(1);
  DenseMatrix out = x;
  for (Index i = 0; i < x.rows(); ++i) {
    if (!mask[static_cast<std::size_t>(i)]) continue;
    const double sd = rng.uniform();
    for (Index j = 0; j < x.cols(); ++j) out(i, j) += sd * rng.normal();
  }
  return out;
}

std::vector<std::pair<Index, Index>> structure_flips(Index n, double ratio, std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw Error("apply_structure_mistakes: ratio must be in [0, 1]");
  std::vector<std::pair<Index, Index>> flips;
  if (ratio == 0.0) return flips;
  CounterRng rng(seed, Stream::structure_mistakes);
  for (Index i = 0; i < n; ++i)
    for (Index j = i + 1; j < n; ++j)
      if (rng.uniform() < ratio) flips.emplace_back(i, j);
  return flips;
}

Graph apply_structure_mistakes(const Graph& g, double ratio, std::uint64_t seed) {
  const auto flips = structure_flips(g.num_nodes(), ratio, seed);
  if (flips.empty()) return g;
  std::vector<std::pair<Index, Index>> edges = g.edges();  // sorted, u < v
  std::vector<std::pair<Index, Index>> out;
  out.reserve(edges.size() + flips.size());
  // Symmetric difference of two sorted lists.
  std::set_symmetric_difference(edges.begin(), edges.end(), flips.begin(), flips.end(), std::back_inserter(out));
  return Graph::from_edges(g.num_nodes(), out);
}

std::vector<Index> feature_rate_columns(Index m, double rate, std::uint64_t seed) {
  if (!(rate > 0.0 && rate <= 1.0)) throw Error("apply_feature_rate: rate must be in (0, 1]");
  const auto keep = static_cast<Index>(std::ceil(rate * static_cast<double>(m) - 1e-9));
  if (keep < 1) throw Error("apply_feature_rate: rate keeps no columns");
  CounterRng rng(seed, Stream::feature_rate);
  std::vector<Index> pool(static_cast<std::size_t>(m));
  for (Index i = 0; i < m; ++i) pool[static_cast<std::size_t>(i)] = i;
  // partial Fisher-Yates
  for (Index i = 0; i < keep; ++i) {
    const auto j = i + static_cast<Index>(rng.below(static_cast<std::uint64_t>(m - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(j)]);
  }
  std::vector<Index> cols(pool.begin(), pool.begin() + keep);
  std::sort(cols.begin(), cols.end());
  return cols;
}

DenseMatrix apply_feature_rate(const DenseMatrix& x, double rate, std::uint64_t seed) {
  const std::vector<Index> cols = feature_rate_columns(x.cols(), rate, seed);
  DenseMatrix out(x.rows(), static_cast<Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) out.col(static_cast<Index>(k)) = x.col(cols[k]);
  return out;
}

DenseMatrix apply_feature_noise(const DenseMatrix& x, const NoiseSpec& spec) {
  switch (spec.kind) {
    case NoiseCase::noise_level: return apply_noise_level(x, spec.parameter, spec.seed);
    case NoiseCase::noise_rate: return apply_noise_rate(x, spec.parameter, spec.seed);
    case NoiseCase::feature_rate: return apply_feature_rate(x, spec.parameter, spec.seed);
    case NoiseCase::structure_mistakes: return x;
  }
  return x;
}

}  // namespace bigcn
