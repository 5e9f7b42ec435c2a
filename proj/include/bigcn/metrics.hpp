// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <string>
#include <vector>

#include "bigcn/core.hpp"

namespace bigcn {

struct MetricReport {
  std::string name;
  double mean = 0.0;
  double stddev = 0.0;  // population
  std::size_t runs = 0;
};

/// Index of the largest entry in each row; ties go to the lowest index.
std::vector<int> argmax_rows(const DenseMatrix& logits);

/// Fraction of the listed rows whose argmax equals the label.
double accuracy(const DenseMatrix& logits, std::span<const int> labels, std::span<const Index> rows);

/// Mann-Whitney AUC with average ranks for ties. Both classes must occur.
double roc_auc(std::span<const double> scores, std::span<const int> labels);

/// Mean and population standard deviation.
MetricReport aggregate_runs(std::span<const double> values, std::string name = "metric");

}  // namespace bigcn
