// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"
#include "bigcn/rng.hpp"

namespace bigcn {

enum class Split : std::uint8_t { none, train, val, test };

struct Dataset {
  Graph graph;
  DenseMatrix features;     // n x d
  std::vector<int> labels;  // -1 = unlabeled
  std::vector<Split> masks;
  int num_classes = 0;

  Index num_nodes() const { return graph.num_nodes(); }
  /// Node indices carrying the given mask, ascending.
  std::vector<Index> nodes_in(Split s) const;
  /// Checks label range, mask/feature/label lengths, labeled masked nodes.
  void validate() const;
};

using Edge = std::pair<Index, Index>;

struct EdgeSplit {
  Graph message;  // graph used for propagation (train positives only)
  std::vector<Edge> train_pos;
  std::vector<Edge> val_pos;
  std::vector<Edge> test_pos;
  std::vector<Edge> val_neg;
  std::vector<Edge> test_neg;
};

struct EdgeRatios {
  double train = 0.85;
  double val = 0.05;
  double test = 0.10;
};

/// Reads meta.txt, edges.txt, features.txt, labels.txt and masks.txt.
/// Errors name the file and 1-based line number.
Dataset load_dataset(const std::filesystem::path& dir);
void save_dataset(const Dataset& ds, const std::filesystem::path& dir);

struct SbmParams {
  int communities = 4;
  Index nodes_per_community = 100;
  double p_in = 0.1;
  double p_out = 0.01;
  Index feature_dim = 32;
  /// Feature columns are split into this many contiguous blocks; each block
  /// shares one latent factor per node.
  Index feature_blocks = 4;
  /// Std of the block-constant class means.
  double signal_scale = 1.0;
  /// Std of the shared per-(node, block) latent factor.
  double latent_scale = 1.0;
  /// Std of the independent per-entry noise.
  double noise_sigma = 1.0;
  double train_fraction = 0.05;
  double val_fraction = 0.15;
  std::uint64_t seed = 0;

  void validate() const;
};

/// Stochastic block model graph with block-correlated features and
/// stratified train/val/test masks.
Dataset sbm_generate(const SbmParams& params);

/// Splits positive edges, keeps train positives as the message graph and
/// draws one non-edge of g per val/test positive.
EdgeSplit split_edges(const Graph& g, const EdgeRatios& ratios, std::uint64_t seed);

/// `count` distinct pairs u < v, uniform among pairs that are not edges of
/// `g` and not in `exclude` (sorted).
std::vector<Edge> sample_non_edges(const Graph& g, std::size_t count, CounterRng& rng,
                                   const std::vector<Edge>& exclude = {});

struct NamedMatrix {
  std::string name;
  DenseMatrix value;
};

inline constexpr std::uint32_t kCheckpointVersion = 1;

/// Binary layout: "BGCN", u32 version, then per parameter u32 name length,
/// name bytes, u64 rows, u64 cols, rows*cols little-endian f64 (row-major).
void save_checkpoint(const std::vector<NamedMatrix>& params, const std::filesystem::path& path);
std::vector<NamedMatrix> load_checkpoint(const std::filesystem::path& path);

}  // namespace bigcn
