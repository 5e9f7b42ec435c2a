// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bigcn/data_io.hpp"
#include "bigcn/metrics.hpp"
#include "bigcn/model.hpp"
#include "bigcn/noise.hpp"
#include "bigcn/training.hpp"

namespace bigcn {

enum class Task { node_classification, link_prediction };

/// Raised for invalid experiment configuration (CLI exit code 2).
class ConfigError : public Error {
 public:
  using Error::Error;
};

struct ExperimentConfig {
  Task task = Task::node_classification;
  /// Empty path means a synthetic SBM dataset built from `sbm`.
  std::filesystem::path dataset_path;
  SbmParams sbm;
  /// Hidden widths; input and output widths come from the data.
  std::vector<Index> hidden = {16};
  /// Output width for link prediction embeddings.
  Index embedding_dim = 32;
  ModelConfig model;
  TrainConfig train;
  std::optional<NoiseCase> noise;
  std::vector<double> noise_values;
  int runs = 10;
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "results";
  bool write_history = true;
  bool write_checkpoints = false;

  void validate() const;
};

/// Flat "key = value" text, '#' comments, dotted section keys. Unknown keys
/// are rejected.
ExperimentConfig parse_experiment_config(const std::string& text);
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

struct Preset {
  std::string name;
  std::string description;
  Task task = Task::node_classification;
  double p = 0.0;
  double lambda = 0.0;
  int k = 2;
  Index hidden = 16;
  double dropout = 0.5;
  double learning_rate = 0.01;
};

/// Throws ConfigError for unknown names.
Preset preset(const std::string& name);
std::vector<Preset> all_presets();
/// Copies the preset's hyperparameters into the config.
void apply_preset(ExperimentConfig& config, const Preset& p);

struct RunRecord {
  double sweep_value = 0.0;  // NaN when there is no sweep
  int run = 0;
  std::uint64_t seed = 0;
  double metric = 0.0;
  bool ok = true;
  std::string error;
};

struct ExperimentResult {
  std::vector<RunRecord> rows;  // sweep-major, run-minor
  std::vector<std::pair<double, MetricReport>> summary;
  bool diverged = false;
};

/// Trains and evaluates a single (sweep value, seed) cell. The metric is
/// test accuracy (node task) or test ROC-AUC (link task) at the best
/// validation epoch.
TrainResult run_single(const ExperimentConfig& config, std::optional<double> sweep_value, std::uint64_t seed);

/// Runs every sweep value x run on a worker pool capped by BIFILTER_THREADS,
/// then writes results.csv and summary.md in deterministic order.
ExperimentResult run_experiment(const ExperimentConfig& config, bool gnuplot = false);

/// Worker count from BIFILTER_THREADS (default 1).
unsigned worker_threads();

std::string format_results_csv(const std::vector<RunRecord>& rows);

}  // namespace bigcn
