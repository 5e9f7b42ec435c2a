// SPDX-License-Identifier: Apache-2.0
#include <cmath>
#include <map>

#include "bigcn/noise.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bigcn;
using testutil::max_abs;

TEST_CASE("noise spec ranges") {
  CHECK_NOTHROW((NoiseSpec{NoiseCase::noise_level, 0.9, 0}.validate()));
  CHECK_THROWS_AS((NoiseSpec{NoiseCase::noise_level, 0.95, 0}.validate()), Error);
  CHECK_THROWS_AS((NoiseSpec{NoiseCase::noise_rate, 1.1, 0}.validate()), Error);
  CHECK_THROWS_AS((NoiseSpec{NoiseCase::structure_mistakes, 0.02, 0}.validate()), Error);
  CHECK_THROWS_AS((NoiseSpec{NoiseCase::feature_rate, 0.0, 0}.validate()), Error);
  for (auto c : {NoiseCase::noise_level, NoiseCase::noise_rate, NoiseCase::structure_mistakes, NoiseCase::feature_rate})
    CHECK(parse_noise_case(to_string(c)) == c);
  CHECK_THROWS_AS(parse_noise_case("gaussian"), Error);
}

TEST_CASE("noise level") {
  CounterRng rng(60, Stream::test_fixture);
  const DenseMatrix x = random_matrix(1000, 100, rng);
  CHECK(apply_noise_level(x, 0.0, 3) == x);
  const DenseMatrix y = apply_noise_level(x, 0.5, 3);
  CHECK(y == apply_noise_level(x, 0.5, 3));
  CHECK(y != apply_noise_level(x, 0.5, 4));
  CHECK(y.rows() == x.rows());
  CHECK(y.cols() == x.cols());
  const DenseMatrix diff = y - x;
  const double mean = diff.mean();
  const double var = (diff.array() - mean).square().sum() / static_cast<double>(diff.size() - 1);
  CHECK(std::abs(var - 0.25) / 0.25 < 0.03);
}

TEST_CASE("noise rate") {
  CounterRng rng(61, Stream::test_fixture);
  const DenseMatrix x = random_matrix(10000, 4, rng);
  CHECK(apply_noise_rate(x, 0.0, 1) == x);
  const DenseMatrix all = apply_noise_rate(x, 1.0, 1);
  int untouched = 0;
  for (Index i = 0; i < x.rows(); ++i) untouched += all.row(i) == x.row(i);
  CHECK(untouched == 0);

  const DenseMatrix y = apply_noise_rate(x, 0.4, 2);
  CHECK(y == apply_noise_rate(x, 0.4, 2));
  const auto mask = noise_rate_mask(x.rows(), 0.4, 2);
  int perturbed = 0;
  for (Index i = 0; i < x.rows(); ++i) {
    const bool changed = y.row(i) != x.row(i);
    CHECK(changed == mask[static_cast<std::size_t>(i)]);
    perturbed += changed;
  }
  // binomial 99% interval for n = 1e4, p = 0.4
  const double sd = std::sqrt(10000 * 0.4 * 0.6);
  CHECK(std::abs(perturbed - 4000.0) <= 2.5758 * sd);
}

TEST_CASE("structure mistakes") {
  CounterRng rng(62, Stream::test_fixture);
  const Graph g = random_graph(200, 0.05, rng, false);
  const Graph same = apply_structure_mistakes(g, 0.0, 5);
  CHECK(same.edges() == g.edges());

  const double r = 0.01;
  const Graph h = apply_structure_mistakes(g, r, 5);
  CHECK(h.adjacency().is_symmetric());
  for (Index i = 0; i < 200; ++i) CHECK(h.adjacency().coeff(i, i) == 0.0);
  // count pairs whose edge state changed
  Index changed = 0;
  for (Index u = 0; u < 200; ++u)
    for (Index v = u + 1; v < 200; ++v) changed += g.has_edge(u, v) != h.has_edge(u, v);
  CHECK(static_cast<std::size_t>(changed) == structure_flips(200, r, 5).size());
  const double pairs = 200.0 * 199.0 / 2.0;
  CHECK(std::abs(static_cast<double>(changed) - r * pairs) <= 2.5758 * std::sqrt(pairs * r * (1 - r)));

  // toggling twice with the same seed restores the graph
  CHECK(apply_structure_mistakes(h, r, 5).edges() == g.edges());
  CHECK(apply_structure_mistakes(g, r, 5).edges() == h.edges());
}

TEST_CASE("feature rate") {
  CounterRng rng(63, Stream::test_fixture);
  const DenseMatrix x = random_matrix(5, 10, rng);
  CHECK(apply_feature_rate(x, 1.0, 3) == x);
  const DenseMatrix two = apply_feature_rate(x, 0.2, 3);
  CHECK(two.cols() == 2);
  const auto cols = feature_rate_columns(10, 0.2, 3);
  CHECK(cols[0] < cols[1]);
  CHECK(two.col(0) == x.col(cols[0]));
  CHECK(feature_rate_columns(10, 0.3, 1).size() == 3);  // 0.3 * 10 is not rounded up to 4
  CHECK_THROWS_AS(feature_rate_columns(10, 0.0, 1), Error);

  // uniformity over the C(5,2) = 10 subsets
  std::map<std::vector<Index>, int> counts;
  const int draws = 10000;
  for (int s = 0; s < draws; ++s) ++counts[feature_rate_columns(5, 0.4, static_cast<std::uint64_t>(s))];
  CHECK(counts.size() == 10);
  double chi = 0.0;
  for (const auto& [k, c] : counts) chi += (c - 1000.0) * (c - 1000.0) / 1000.0;
  CHECK(chi < 27.88);  // 9 dof, p = 0.001
}

TEST_CASE("apply_feature_noise dispatch") {
  CounterRng rng(64, Stream::test_fixture);
  const DenseMatrix x = random_matrix(6, 4, rng);
  CHECK(apply_feature_noise(x, {NoiseCase::noise_level, 0.3, 9}) == apply_noise_level(x, 0.3, 9));
  CHECK(apply_feature_noise(x, {NoiseCase::noise_rate, 0.3, 9}) == apply_noise_rate(x, 0.3, 9));
  CHECK(apply_feature_noise(x, {NoiseCase::feature_rate, 0.5, 9}) == apply_feature_rate(x, 0.5, 9));
  CHECK(apply_feature_noise(x, {NoiseCase::structure_mistakes, 0.01, 9}) == x);
}
