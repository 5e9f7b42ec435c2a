// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/data_io.hpp"
#include "bigcn/model.hpp"

namespace bigcn {

struct TrainConfig {
  double learning_rate = 0.01;
  double weight_decay = 5e-4;
  double dropout = 0.5;
  int max_epochs = 1000;
  int patience = 100;
  int eval_every = 10;
  std::uint64_t seed = 0;

  /// Node classification protocol: early stopping on validation accuracy.
  static TrainConfig node_classification();
  /// Link prediction protocol: 100 epochs, evaluation every 10.
  static TrainConfig link_prediction();

  void validate() const;
};

/// Thrown when the loss or a gradient stops being finite.
class DivergenceError : public NumericError {
 public:
  using NumericError::NumericError;
};

struct AdamState {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  long step = 0;
  std::vector<DenseMatrix> first;
  std::vector<DenseMatrix> second;
};

/// One bias-corrected Adam update. Weight decay is added to the gradient
/// (coupled L2 penalty) for parameters flagged with weight_decay.
void adam_step(std::span<const NamedParameter> params, std::span<const DenseMatrix> grads, AdamState& state,
               const TrainConfig& config);

/// Mean negative log-likelihood over the listed rows.
double softmax_cross_entropy(const DenseMatrix& logits, std::span<const int> labels, std::span<const Index> rows);

double link_logit(const Vector& zu, const Vector& zv);
/// Mean BCE of logits against 0/1 labels.
double bce_with_logits(std::span<const double> scores, std::span<const int> labels);

/// Inner-product scores of the listed pairs.
std::vector<double> link_scores(const DenseMatrix& embeddings, std::span<const Edge> pairs);

struct EpochRecord {
  int epoch = 0;
  double train_loss = 0.0;
  double val_metric = 0.0;
  double test_metric = 0.0;
};

struct TrainResult {
  std::vector<EpochRecord> history;
  int best_epoch = 0;
  double best_val = 0.0;
  double test_at_best = 0.0;
  Model best_model;
};

/// Full-batch training with early stopping on validation accuracy. Total
/// loss is cross-entropy + l1_reg_weight * sum |W2| (+ weight decay on W).
TrainResult train_node_classification(const ModelConfig& model_config, const Dataset& data,
                                      const TrainConfig& config);

/// Trains on split.train_pos with one fresh negative per positive each
/// epoch; evaluates ROC-AUC every eval_every epochs.
TrainResult train_link_prediction(const ModelConfig& model_config, const DenseMatrix& features,
                                  const EdgeSplit& split, const TrainConfig& config);

/// CSV with header epoch,train_loss,val_metric,test_metric.
void write_history_csv(const std::vector<EpochRecord>& history, const std::filesystem::path& path);

std::vector<NamedMatrix> model_checkpoint(Model& model);
void restore_checkpoint(Model& model, const std::vector<NamedMatrix>& params);

}  // namespace bigcn
