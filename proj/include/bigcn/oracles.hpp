// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bigcn/bifilter.hpp"
#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"
#include "bigcn/rng.hpp"

namespace bigcn {

/// Random undirected graph on n nodes; each pair is an edge with probability
/// `density`. A path 0-1-...-(n-1) is added when `connected` is set.
Graph random_graph(Index n, double density, CounterRng& rng, bool connected = true);
DenseMatrix random_matrix(Index rows, Index cols, CounterRng& rng, double scale = 1.0);
/// A valid feature Laplacian: L2 built from a random U.
DenseMatrix random_feature_laplacian(Index d, CounterRng& rng);

struct OracleResult {
  std::string family;
  std::string name;
  double residual = 0.0;
  double tolerance = 0.0;
  bool passed = false;
};

struct OracleReport {
  std::vector<OracleResult> checks;
  bool passed() const;
  std::size_t family_count() const;
  void print(std::ostream& out) const;
};

using AdmmFn = std::function<AdmmResult(const DenseMatrix&, const SparseMatrix&, const DenseMatrix&,
                                        const FilterParams&)>;

/// Runs every registered oracle comparison. The ADMM implementation is
/// injectable so a deliberately broken solver can be shown to fail.
OracleReport oracle_check(const AdmmFn& admm = admm_bifilter, std::uint64_t seed = 7);

}  // namespace bigcn
