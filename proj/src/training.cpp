// SPDX-License-Identifier: Apache-2.0
#include "bigcn/training.hpp"

#include <cmath>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "bigcn/metrics.hpp"

namespace bigcn {

TrainConfig TrainConfig::node_classification() { return TrainConfig{}; }

TrainConfig TrainConfig::link_prediction() {
  TrainConfig c;
  c.max_epochs = 100;
  c.patience = 100;
  c.eval_every = 10;
  return c;
}

void TrainConfig::validate() const {
  if (!(learning_rate > 0.0)) throw Error("TrainConfig: learning_rate must be > 0");
  if (!(weight_decay >= 0.0)) throw Error("TrainConfig: weight_decay must be >= 0");
  if (!(dropout >= 0.0 && dropout < 1.0)) throw Error("TrainConfig: dropout must be in [0, 1)");
  if (max_epochs < 1) throw Error("TrainConfig: max_epochs must be >= 1");
  if (patience < 1 || patience > max_epochs) throw Error("TrainConfig: patience must be in [1, max_epochs]");
  if (eval_every < 1) throw Error("TrainConfig: eval_every must be >= 1");
}

void adam_step(std::span<const NamedParameter> params, std::span<const DenseMatrix> grads, AdamState& state,
               const TrainConfig& config) {
  require_dims(params.size() == grads.size(), "adam_step: one gradient per parameter");
  if (state.first.empty()) {
    for (const auto& p : params) {
      state.first.push_back(DenseMatrix::Zero(p.value->rows(), p.value->cols()));
      state.second.push_back(DenseMatrix::Zero(p.value->rows(), p.value->cols()));
    }
  }
  require_dims(state.first.size() == params.size(), "adam_step: state does not match parameters");
  ++state.step;
  const double c1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    DenseMatrix& w = *params[k].value;
    require_dims(grads[k].rows() == w.rows() && grads[k].cols() == w.cols(),
                 "adam_step: gradient shape differs for " + params[k].name);
    if (!grads[k].allFinite()) throw DivergenceError("adam_step: non-finite gradient for " + params[k].name);
    DenseMatrix g = grads[k];
    if (params[k].weight_decay && config.weight_decay > 0.0) g += config.weight_decay * w;
    state.first[k] = state.beta1 * state.first[k] + (1.0 - state.beta1) * g;
    state.second[k] = state.beta2 * state.second[k] + (1.0 - state.beta2) * g.cwiseProduct(g);
    const auto m_hat = state.first[k].array() / c1;
    const auto v_hat = state.second[k].array() / c2;
    w.array() -= config.learning_rate * m_hat / (v_hat.sqrt() + state.epsilon);
  }
}

double softmax_cross_entropy(const DenseMatrix& logits, std::span<const int> labels, std::span<const Index> rows) {
  Tape t;
  return softmax_cross_entropy(t.constant(logits), labels, rows).value()(0, 0);
}

double link_logit(const Vector& zu, const Vector& zv) {
  require_dims(zu.size() == zv.size(), "link_logit: embedding sizes differ");
  return zu.dot(zv);
}

double bce_with_logits(std::span<const double> scores, std::span<const int> labels) {
  DenseMatrix s(static_cast<Index>(scores.size()), 1);
  for (std::size_t k = 0; k < scores.size(); ++k) s(static_cast<Index>(k), 0) = scores[k];
  Tape t;
  return bce_with_logits(t.constant(std::move(s)), labels).value()(0, 0);
}

std::vector<double> link_scores(const DenseMatrix& embeddings, std::span<const Edge> pairs) {
  std::vector<double> out;
  out.reserve(pairs.size());
  for (const auto& [u, v] : pairs) out.push_back(embeddings.row(u).dot(embeddings.row(v)));
  return out;
}

std::vector<NamedMatrix> model_checkpoint(Model& model) {
  std::vector<NamedMatrix> out;
  for (const auto& p : model.parameters()) out.push_back({p.name, *p.value});
  return out;
}

void restore_checkpoint(Model& model, const std::vector<NamedMatrix>& params) {
  auto named = model.parameters();
  if (named.size() != params.size()) throw FormatError("checkpoint has a different parameter count than the model");
  for (std::size_t k = 0; k < named.size(); ++k) {
    if (named[k].name != params[k].name) throw FormatError("checkpoint parameter '" + params[k].name + "' where '" + named[k].name + "' expected");
    if (named[k].value->rows() != params[k].value.rows() || named[k].value->cols() != params[k].value.cols())
      throw FormatError("checkpoint parameter '" + params[k].name + "' has the wrong shape");
    *named[k].value = params[k].value;
  }
}

namespace {

ModelConfig with_dropout(ModelConfig cfg, const TrainConfig& train) {
  cfg.dropout = train.dropout;
  return cfg;
}

std::vector<DenseMatrix> grads_of(const Tape& tape, const std::vector<Var>& vars) {
  std::vector<DenseMatrix> out;
  out.reserve(vars.size());
  for (Var v : vars) out.push_back(tape.grad(v));
  return out;
}

void check_loss(double loss, int epoch) {
  if (!std::isfinite(loss)) throw DivergenceError("training diverged: non-finite loss at epoch " + std::to_string(epoch));
}

}  // namespace

TrainResult train_node_classification(const ModelConfig& model_config, const Dataset& data,
                                      const TrainConfig& config) {
  config.validate();
  data.validate();
  const ModelConfig cfg = with_dropout(model_config, config);
  Model model = Model::initialize(cfg, config.seed);
  model.prepare_fixed_l2(data.features);
  const GraphContext graph(normalized_laplacian(data.graph), cfg.filter);

  const std::vector<Index> train_rows = data.nodes_in(Split::train);
  const std::vector<Index> val_rows = data.nodes_in(Split::val);
  const std::vector<Index> test_rows = data.nodes_in(Split::test);
  if (train_rows.empty() || val_rows.empty() || test_rows.empty())
    throw Error("train_node_classification: train, val and test masks must be non-empty");

  CounterRng dropout_rng(config.seed, Stream::dropout);
  AdamState adam;
  TrainResult result;
  result.best_val = -1.0;
  result.best_model = model;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    double loss_value = 0.0;
    {
      Tape tape;
      ForwardResult fwd = model_forward(tape, model, data.features, graph, Mode::train, &dropout_rng);
      Var loss = softmax_cross_entropy(fwd.output, data.labels, train_rows);
      if (cfg.l1_reg_weight > 0.0) loss = loss + scale(fwd.l2_penalty, cfg.l1_reg_weight);
      loss_value = loss.value()(0, 0);
      check_loss(loss_value, epoch);
      tape.backward(loss);
      const auto params = model.parameters();
      adam_step(params, grads_of(tape, fwd.parameters), adam, config);
    }

    const DenseMatrix logits = predict(model, data.features, graph);
    if (!logits.allFinite()) throw DivergenceError("training diverged: non-finite logits at epoch " + std::to_string(epoch));
    const double val = accuracy(logits, data.labels, val_rows);
    const double test = accuracy(logits, data.labels, test_rows);
    result.history.push_back({epoch, loss_value, val, test});
    if (val > result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch;
      result.test_at_best = test;
      result.best_model = model;
    }
    if (epoch - result.best_epoch >= config.patience) break;
  }
  return result;
}

TrainResult train_link_prediction(const ModelConfig& model_config, const DenseMatrix& features,
                                  const EdgeSplit& split, const TrainConfig& config) {
  config.validate();
  if (split.train_pos.empty() || split.val_pos.empty() || split.test_pos.empty())
    throw Error("train_link_prediction: every split needs positives");
  const ModelConfig cfg = with_dropout(model_config, config);
  Model model = Model::initialize(cfg, config.seed);
  model.prepare_fixed_l2(features);
  const GraphContext graph(normalized_laplacian(split.message), cfg.filter);

  auto eval_pairs = [](const std::vector<Edge>& pos, const std::vector<Edge>& neg) {
    std::vector<Edge> pairs(pos);
    pairs.insert(pairs.end(), neg.begin(), neg.end());
    std::vector<int> labels(pos.size(), 1);
    labels.resize(pos.size() + neg.size(), 0);
    return std::pair{pairs, labels};
  };
  const auto [val_pairs, val_labels] = eval_pairs(split.val_pos, split.val_neg);
  const auto [test_pairs, test_labels] = eval_pairs(split.test_pos, split.test_neg);

  CounterRng dropout_rng(config.seed, Stream::dropout);
  const CounterRng negative_root(config.seed, Stream::negatives);
  AdamState adam;
  TrainResult result;
  result.best_val = -1.0;
  result.best_model = model;

  for (int epoch = 1; epoch <= config.max_epochs; ++epoch) {
    CounterRng neg_rng = negative_root.split(static_cast<std::uint64_t>(epoch));
    const std::vector<Edge> negatives = sample_non_edges(split.message, split.train_pos.size(), neg_rng);
    std::vector<Index> us;
    std::vector<Index> vs;
    std::vector<int> labels;
    for (const auto& [u, v] : split.train_pos) {
      us.push_back(u);
      vs.push_back(v);
      labels.push_back(1);
    }
    for (const auto& [u, v] : negatives) {
      us.push_back(u);
      vs.push_back(v);
      labels.push_back(0);
    }

    double loss_value = 0.0;
    {
      Tape tape;
      ForwardResult fwd = model_forward(tape, model, features, graph, Mode::train, &dropout_rng);
      const Var scores = row_sum(hadamard(gather_rows(fwd.output, us), gather_rows(fwd.output, vs)));
      Var loss = bce_with_logits(scores, labels);
      if (cfg.l1_reg_weight > 0.0) loss = loss + scale(fwd.l2_penalty, cfg.l1_reg_weight);
      loss_value = loss.value()(0, 0);
      check_loss(loss_value, epoch);
      tape.backward(loss);
      const auto params = model.parameters();
      adam_step(params, grads_of(tape, fwd.parameters), adam, config);
    }

    if (epoch % config.eval_every != 0 && epoch != config.max_epochs) continue;
    const DenseMatrix z = predict(model, features, graph);
    if (!z.allFinite()) throw DivergenceError("training diverged: non-finite embeddings at epoch " + std::to_string(epoch));
    const double val = roc_auc(link_scores(z, val_pairs), val_labels);
    const double test = roc_auc(link_scores(z, test_pairs), test_labels);
    result.history.push_back({epoch, loss_value, val, test});
    if (val > result.best_val) {
      result.best_val = val;
      result.best_epoch = epoch;
      result.test_at_best = test;
      result.best_model = model;
    }
  }
  return result;
}

void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error("cannot write " + path.string());
  out << "epoch,train_loss,val_metric,test_metric\n";
  out << std::setprecision(17);
  for (const auto& r : history) out << r.epoch << ',' << r.train_loss << ',' << r.val_metric << ',' << r.test_metric << '\n';
}

}  // namespace bigcn
