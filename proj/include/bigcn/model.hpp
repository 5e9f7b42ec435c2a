// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "bigcn/autodiff.hpp"
#include "bigcn/bifilter.hpp"
#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"
#include "bigcn/rng.hpp"

namespace bigcn {

enum class L2Mode { learnable, fixed_correlation, identity };
enum class ModelKind { bigcn, gcn };
enum class Activation { relu, identity };
enum class Mode { train, eval };

struct ModelConfig {
  /// Input width, hidden widths, output width.
  std::vector<Index> layer_dims;
  double dropout = 0.5;
  ModelKind kind = ModelKind::bigcn;
  L2Mode l2_mode = L2Mode::learnable;
  FilterParams filter = FilterParams::from_lambda(1.8, 3.0);
  double l1_reg_weight = 1e-4;
  /// Smoothing weight of the single-direction baseline, (I - lambda L1).
  double gcn_lambda = 1.0;

  void validate() const;
  std::size_t num_layers() const { return layer_dims.empty() ? 0 : layer_dims.size() - 1; }
};

struct LayerParams {
  DenseMatrix weight;  // d_in x d_out
  DenseMatrix upper;   // d_in x d_in, strictly upper part used; empty unless learnable L2
  DenseMatrix fixed_l2;  // d_in x d_in; empty means identity (fixed_correlation mode only)
};

/// Reference to a trainable tensor inside a Model.
struct NamedParameter {
  std::string name;
  DenseMatrix* value;
  bool weight_decay;  // true for W, false for the L2 parameter
};

class Model {
 public:
  Model() = default;
  Model(ModelConfig config, std::vector<LayerParams> layers);

  /// Glorot-uniform W, zero U.
  static Model initialize(const ModelConfig& config, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  const std::vector<LayerParams>& layers() const { return layers_; }
  std::vector<LayerParams>& layers() { return layers_; }

  /// Fixes the first layer's feature graph from the input features. Needed
  /// once per dataset in fixed_correlation mode; no-op otherwise.
  void prepare_fixed_l2(const DenseMatrix& features);

  std::vector<NamedParameter> parameters();

 private:
  ModelConfig config_;
  std::vector<LayerParams> layers_;
};

/// Node-graph operator shared by all layers of a forward pass. Holds the
/// factorization of (I + a L1) for the exact filter variant.
class GraphContext {
 public:
  GraphContext(SparseMatrix l1, const FilterParams& filter);
  const SparseMatrix& l1() const { return l1_; }
  const std::shared_ptr<const Cholesky>& node_factor() const { return node_factor_; }

 private:
  SparseMatrix l1_;
  std::shared_ptr<const Cholesky> node_factor_;
};

/// Strictly-upper mask of order d.
DenseMatrix strict_upper_mask(Index d);

/// L2 = I - D2^{-1/2} A2 D2^{-1/2}, A2 = W2 + W2^T, W2 = sigmoid(U) on the
/// strictly upper entries (zero elsewhere).
Var build_learnable_L2(Var upper);
DenseMatrix build_learnable_L2(const DenseMatrix& upper);

/// Sigmoid-masked feature adjacency W2 (strictly upper).
Var feature_adjacency(Var upper);

/// Thresholded cosine-correlation feature graph Laplacian. Columns of x are
/// the feature signals; zero-norm columns have cosine 0 with everything.
DenseMatrix build_fixed_L2(const DenseMatrix& x);

/// Differentiable unrolled ADMM over a tape. l2 may be a constant or a
/// function of trainable parameters.
Var admm_unrolled(Var f, const GraphContext& graph, Var l2, const FilterParams& params);

/// sigma(ADMM(H, L1, L2) W).
Var bigcn_layer(Var h, const GraphContext& graph, Var l2, Var weight, const FilterParams& params,
                Activation act);

/// sigma((I - lambda L1) H W).
Var gcn_baseline_layer(Var h, const SparseMatrix& l1, Var weight, double lambda, Activation act);

/// sigma((I + lambda L1)^{-1} H W) with a precomputed factorization.
Var gcn_exact_layer(Var h, std::shared_ptr<const Cholesky> factor, Var weight, Activation act);

struct ForwardResult {
  Var output;
  /// Sum over layers of |W2| entries (0 when there is no learnable L2).
  Var l2_penalty;
  /// Tape leaves in Model::parameters() order.
  std::vector<Var> parameters;
};

/// Stacked layers: relu on hidden layers, identity on the last. In train
/// mode dropout masks come from `dropout_rng` and are applied to each
/// layer's input.
ForwardResult model_forward(Tape& tape, Model& model, const DenseMatrix& x, const GraphContext& graph,
                            Mode mode, CounterRng* dropout_rng);

/// Eval-mode forward without gradients.
DenseMatrix predict(Model& model, const DenseMatrix& x, const GraphContext& graph);

}  // namespace bigcn
