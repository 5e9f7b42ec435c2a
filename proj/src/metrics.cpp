// SPDX-License-Identifier: Apache-2.0
#include "bigcn/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace bigcn {

std::vector<int> argmax_rows(const DenseMatrix& logits) {
  std::vector<int> out(static_cast<std::size_t>(logits.rows()));
  for (Index i = 0; i < logits.rows(); ++i) {
    Index best = 0;
    for (Index j = 1; j < logits.cols(); ++j)
      if (logits(i, j) > logits(i, best)) best = j;
    out[static_cast<std::size_t>(i)] = static_cast<int>(best);
  }
  return out;
}

double accuracy(const DenseMatrix& logits, std::span<const int> labels, std::span<const Index> rows) {
  if (rows.empty()) throw Error("accuracy: empty mask");
  require_dims(static_cast<Index>(labels.size()) == logits.rows(), "accuracy: one label per row");
  const std::vector<int> pred = argmax_rows(logits);
  std::size_t hits = 0;
  for (Index r : rows)
    if (pred[static_cast<std::size_t>(r)] == labels[static_cast<std::size_t>(r)]) ++hits;
  return static_cast<double>(hits) / static_cast<double>(rows.size());
}

double roc_auc(std::span<const double> scores, std::span<const int> labels) {
  require_dims(scores.size() == labels.size(), "roc_auc: scores and labels differ in length");
  const std::size_t m = scores.size();
  std::vector<std::size_t> order(m);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

  std::vector<double> rank(m);
  for (std::size_t i = 0; i < m;) {
    std::size_t j = i;
    while (j + 1 < m && scores[order[j + 1]] == scores[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;  // 1-based average rank
    for (std::size_t k = i; k <= j; ++k) rank[order[k]] = avg;
    i = j + 1;
  }

  double pos = 0.0;
  double neg = 0.0;
  double rank_sum = 0.0;
  for (std::size_t i = 0; i < m; ++i) {
    if (labels[i] == 1) {
      pos += 1.0;
      rank_sum += rank[i];
    } else if (labels[i] == 0) {
      neg += 1.0;
    } else {
      throw Error("roc_auc: labels must be 0 or 1");
    }
  }
  if (pos == 0.0 || neg == 0.0) throw Error("roc_auc: both classes must be present");
  return (rank_sum - pos * (pos + 1.0) / 2.0) / (pos * neg);
}

MetricReport aggregate_runs(std::span<const double> values, std::string name) {
  if (values.empty()) throw Error("aggregate_runs: no runs");
  const double n = static_cast<double>(values.size());
  const double mu = std::accumulate(values.begin(), values.end(), 0.0) / n;
  double var = 0.0;
  for (double v : values) var += (v - mu) * (v - mu);
  return MetricReport{std::move(name), mu, std::sqrt(var / n), values.size()};
}

}  // namespace bigcn
