// SPDX-License-Identifier: Apache-2.0
#include "bigcn/model.hpp"

#include <cmath>
#include <string>

#include "bigcn/spectral.hpp"

namespace bigcn {

void ModelConfig::validate() const {
  if (layer_dims.size() < 2) throw Error("ModelConfig: need at least input and output dims");
  if (layer_dims.size() > 5) throw Error("ModelConfig: at most 4 layers are supported");
  for (Index d : layer_dims)
    if (d < 1) throw Error("ModelConfig: layer dims must be positive");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("ModelConfig: dropout must be in [0, 1)");
  if (!(l1_reg_weight >= 0.0)) throw Error("ModelConfig: l1_reg_weight must be >= 0");
  filter.validate();
  if (kind == ModelKind::bigcn && l2_mode != L2Mode::identity) {
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l)
      if (layer_dims[l] < 2) throw Error("ModelConfig: a feature graph needs input width >= 2");
  }
}

Model::Model(ModelConfig config, std::vector<LayerParams> layers)
    : config_(std::move(config)), layers_(std::move(layers)) {
  config_.validate();
  if (layers_.size() != config_.num_layers()) throw Error("Model: layer count does not match config");
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    const Index din = config_.layer_dims[l];
    const Index dout = config_.layer_dims[l + 1];
    require_dims(layers_[l].weight.rows() == din && layers_[l].weight.cols() == dout,
                 "Model: weight " + std::to_string(l) + " has wrong shape");
    const bool learnable = config_.kind == ModelKind::bigcn && config_.l2_mode == L2Mode::learnable;
    if (learnable) {
      require_dims(layers_[l].upper.rows() == din && layers_[l].upper.cols() == din,
                   "Model: L2 parameter " + std::to_string(l) + " has wrong shape");
    }
  }
}

Model Model::initialize(const ModelConfig& config, std::uint64_t seed) {
  config.validate();
  CounterRng rng(seed, Stream::init);
  std::vector<LayerParams> layers;
  for (std::size_t l = 0; l < config.num_layers(); ++l) {
    const Index din = config.layer_dims[l];
    const Index dout = config.layer_dims[l + 1];
    const double limit = std::sqrt(6.0 / static_cast<double>(din + dout));
    LayerParams p;
    p.weight.resize(din, dout);
    for (Index i = 0; i < din; ++i)
      for (Index j = 0; j < dout; ++j) p.weight(i, j) = (2.0 * rng.uniform() - 1.0) * limit;
    if (config.kind == ModelKind::bigcn && config.l2_mode == L2Mode::learnable)
      p.upper = DenseMatrix::Zero(din, din);
    layers.push_back(std::move(p));
  }
  return Model(config, std::move(layers));
}

void Model::prepare_fixed_l2(const DenseMatrix& features) {
  if (config_.kind != ModelKind::bigcn || config_.l2_mode != L2Mode::fixed_correlation) return;
  require_dims(features.cols() == config_.layer_dims[0], "prepare_fixed_l2: feature width mismatch");
  layers_[0].fixed_l2 = build_fixed_L2(features);
}

std::vector<NamedParameter> Model::parameters() {
  std::vector<NamedParameter> out;
  for (std::size_t l = 0; l < layers_.size(); ++l) {
    out.push_back({"layer" + std::to_string(l) + ".W", &layers_[l].weight, true});
    if (layers_[l].upper.size() != 0)
      out.push_back({"layer" + std::to_string(l) + ".U", &layers_[l].upper, false});
  }
  return out;
}

GraphContext::GraphContext(SparseMatrix l1, const FilterParams& filter) : l1_(std::move(l1)) {
  if (filter.variant == FilterVariant::exact) {
    const Index n = l1_.rows();
    if (n > kMaxDenseOrder) throw DimensionError("GraphContext: exact filter exceeds dense limit");
    const DenseMatrix m = DenseMatrix::Identity(n, n) + filter.node_coefficient() * l1_.to_dense();
    node_factor_ = std::make_shared<const Cholesky>(m);
  }
}

DenseMatrix strict_upper_mask(Index d) {
  DenseMatrix m = DenseMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = i + 1; j < d; ++j) m(i, j) = 1.0;
  return m;
}

Var feature_adjacency(Var upper) {
  require_dims(upper.rows() == upper.cols(), "build_learnable_L2: parameter must be square");
  if (upper.rows() < 2) throw Error("build_learnable_L2: need d >= 2");
  Tape& t = *upper.tape();
  return hadamard(sigmoid(upper), t.constant(strict_upper_mask(upper.rows())));
}

Var build_learnable_L2(Var upper) {
  Tape& t = *upper.tape();
  const Var w2 = feature_adjacency(upper);
  const Var a2 = w2 + transpose(w2);
  const Index d = upper.rows();
  return t.constant(DenseMatrix::Identity(d, d)) - sym_normalize(a2);
}

DenseMatrix build_learnable_L2(const DenseMatrix& upper) {
  Tape t;
  return build_learnable_L2(t.constant(upper)).value();
}

DenseMatrix build_fixed_L2(const DenseMatrix& x) {
  const Index d = x.cols();
  if (d < 2) throw Error("build_fixed_L2: need d >= 2");
  const Vector norms = x.colwise().norm().transpose();
  DenseMatrix cosine = x.transpose() * x;
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      cosine(i, j) = (norms(i) > 0.0 && norms(j) > 0.0) ? cosine(i, j) / (norms(i) * norms(j)) : 0.0;

  DenseMatrix prob(d, d);
  for (Index i = 0; i < d; ++i) {
    const double m = cosine.row(i).maxCoeff();
    prob.row(i) = (cosine.row(i).array() - m).exp().matrix();
    prob.row(i) /= prob.row(i).sum();
  }
  const double threshold = prob.mean();

  DenseMatrix adj = DenseMatrix::Zero(d, d);
  for (Index i = 0; i < d; ++i)
    for (Index j = 0; j < d; ++j)
      if (i != j && (prob(i, j) > threshold || prob(j, i) > threshold)) adj(i, j) = 1.0;

  Vector s(d);
  for (Index i = 0; i < d; ++i) {
    const double deg = adj.row(i).sum();
    s(i) = deg > 0.0 ? 1.0 / std::sqrt(deg) : 0.0;
  }
  return DenseMatrix::Identity(d, d) - s.asDiagonal() * adj * s.asDiagonal();
}

Var admm_unrolled(Var f, const GraphContext& graph, Var l2, const FilterParams& params) {
  params.validate();
  require_dims(graph.l1().rows() == f.rows(), "admm_unrolled: L1 must be n x n");
  require_dims(l2.rows() == f.cols() && l2.cols() == f.cols(), "admm_unrolled: L2 must be d x d");
  Tape& t = *f.tape();
  const double a = params.node_coefficient();
  const double b = params.feature_coefficient();
  const double p = params.p;
  const double s = 1.0 / (1.0 + p);
  const bool exact = params.variant == FilterVariant::exact;
  if (exact && !graph.node_factor()) throw Error("admm_unrolled: exact variant needs a node factorization");

  Var feature_system;
  if (exact) {
    const Index d = f.cols();
    feature_system = t.constant(DenseMatrix::Identity(d, d)) + scale(l2, b);
  }

  Var y1 = f;
  Var y2 = f;
  Var z;  // unset means zero
  for (int it = 0; it < params.k; ++it) {
    Var r1 = f + scale(y2, p);
    if (z.valid()) r1 = r1 + z;
    if (exact) {
      y1 = scale(solve_left(graph.node_factor(), r1), s);
    } else {
      y1 = scale(r1 - scale(spmm(graph.l1(), r1), a), s);
    }

    Var r2 = f + scale(y1, p);
    if (z.valid()) r2 = r2 - z;
    if (exact) {
      y2 = scale(solve_right(r2, feature_system), s);
    } else {
      y2 = scale(r2 - scale(matmul(r2, l2), b), s);
    }

    if (it + 1 < params.k) {
      const Var step = scale(y2 - y1, p);
      z = z.valid() ? z + step : step;
    }
  }
  return scale(y1 + y2, 0.5);
}

namespace {

Var activate(Var x, Activation act) { return act == Activation::relu ? relu(x) : x; }

}  // namespace

Var bigcn_layer(Var h, const GraphContext& graph, Var l2, Var weight, const FilterParams& params,
                Activation act) {
  require_dims(h.cols() == weight.rows(), "bigcn_layer: input width differs from W rows");
  return activate(matmul(admm_unrolled(h, graph, l2, params), weight), act);
}

Var gcn_baseline_layer(Var h, const SparseMatrix& l1, Var weight, double lambda, Activation act) {
  require_dims(h.cols() == weight.rows(), "gcn_baseline_layer: input width differs from W rows");
  require_dims(l1.rows() == h.rows(), "gcn_baseline_layer: L1 must be n x n");
  const Var hw = matmul(h, weight);
  return activate(hw - scale(spmm(l1, hw), lambda), act);
}

Var gcn_exact_layer(Var h, std::shared_ptr<const Cholesky> factor, Var weight, Activation act) {
  require_dims(h.cols() == weight.rows(), "gcn_exact_layer: input width differs from W rows");
  return activate(solve_left(std::move(factor), matmul(h, weight)), act);
}

ForwardResult model_forward(Tape& tape, Model& model, const DenseMatrix& x, const GraphContext& graph,
                            Mode mode, CounterRng* dropout_rng) {
  const ModelConfig& cfg = model.config();
  require_dims(x.cols() == cfg.layer_dims[0], "model_forward: feature width differs from layer_dims[0]");
  require_dims(x.rows() == graph.l1().rows(), "model_forward: feature rows differ from node count");
  if (mode == Mode::train && cfg.dropout > 0.0 && dropout_rng == nullptr)
    throw Error("model_forward: train mode with dropout needs a generator");

  ForwardResult out;
  Var h = tape.constant(x);
  Var penalty;
  const std::size_t n_layers = cfg.num_layers();
  for (std::size_t l = 0; l < n_layers; ++l) {
    LayerParams& layer = model.layers()[l];
    const Activation act = l + 1 < n_layers ? Activation::relu : Activation::identity;

    if (mode == Mode::train && cfg.dropout > 0.0) {
      const double keep = 1.0 - cfg.dropout;
      DenseMatrix mask(h.rows(), h.cols());
      for (Index i = 0; i < mask.rows(); ++i)
        for (Index j = 0; j < mask.cols(); ++j) mask(i, j) = dropout_rng->uniform() < keep ? 1.0 / keep : 0.0;
      h = hadamard(h, tape.constant(std::move(mask)));
    }

    const Var w = tape.variable(layer.weight);
    out.parameters.push_back(w);

    if (cfg.kind == ModelKind::gcn) {
      h = gcn_baseline_layer(h, graph.l1(), w, cfg.gcn_lambda, act);
      continue;
    }

    const Index din = cfg.layer_dims[l];
    Var l2;
    switch (cfg.l2_mode) {
      case L2Mode::learnable: {
        const Var u = tape.variable(layer.upper);
        out.parameters.push_back(u);
        l2 = build_learnable_L2(u);
        const Var pen = abs_sum(feature_adjacency(u));
        penalty = penalty.valid() ? penalty + pen : pen;
        break;
      }
      case L2Mode::fixed_correlation:
        l2 = tape.constant(layer.fixed_l2.size() != 0 ? layer.fixed_l2 : DenseMatrix::Identity(din, din));
        break;
      case L2Mode::identity:
        l2 = tape.constant(DenseMatrix::Identity(din, din));
        break;
    }
    h = bigcn_layer(h, graph, l2, w, cfg.filter, act);
  }
  out.output = h;
  out.l2_penalty = penalty.valid() ? penalty : tape.constant(DenseMatrix::Zero(1, 1));
  return out;
}

DenseMatrix predict(Model& model, const DenseMatrix& x, const GraphContext& graph) {
  Tape tape;
  return model_forward(tape, model, x, graph, Mode::eval, nullptr).output.value();
}

}  // namespace bigcn
