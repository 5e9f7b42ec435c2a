// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"

namespace bigcn {

enum class FilterVariant { exact, taylor };

/// Hyperparameters of the bi-directional ADMM filter.
struct FilterParams {
  double lambda1 = 0.0;  // node-graph smoothing weight
  double lambda2 = 0.0;  // feature-graph smoothing weight
  double p = 1.0;        // ADMM penalty
  int k = 2;             // iterations
  FilterVariant variant = FilterVariant::taylor;

  /// Builds params from the single knob lambda = 2*lambda1/(1+p) = 2*lambda2/(1+p).
  static FilterParams from_lambda(double lambda, double p, int k = 2,
                                  FilterVariant variant = FilterVariant::taylor);

  /// 2*lambda1/(1+p), the coefficient multiplying L1 inside each update.
  double node_coefficient() const { return 2.0 * lambda1 / (1.0 + p); }
  double feature_coefficient() const { return 2.0 * lambda2 / (1.0 + p); }

  void validate() const;
};

/// Non-empty when the Taylor variant is used outside the region where both
/// first-order factors have spectrum in [-1, 1] (taking lambda_max = 2 for
/// normalized Laplacians). Advisory only: never an error.
std::optional<std::string> taylor_stability_warning(const FilterParams& params);

struct AdmmTrace {
  std::vector<DenseMatrix> y1;
  std::vector<DenseMatrix> y2;
  std::vector<DenseMatrix> z;
  std::vector<double> primal_residual;  // ||Y2 - Y1||_F after each iteration
};

struct AdmmResult {
  DenseMatrix y;  // (Y1 + Y2) / 2 after the last iteration
  AdmmTrace trace;
};

/// Runs k ADMM iterations from Y1 = Y2 = F, Z = 0, in the order Y1, Y2, Z.
///   exact:  Y1 <- (1/(1+p)) (I + a L1)^{-1} (F + p Y2 + Z)
///           Y2 <- (1/(1+p)) (F + p Y1 - Z) (I + b L2)^{-1}
///   taylor: each inverse replaced by (I - a L1) / (I - b L2)
///   then    Z  <- Z + p (Y2 - Y1)
/// with a = 2 lambda1/(1+p), b = 2 lambda2/(1+p).
AdmmResult admm_bifilter(const DenseMatrix& f, const SparseMatrix& l1, const DenseMatrix& l2,
                         const FilterParams& params);

/// Y1, Y2 after a single Taylor step, written out in closed form:
///   Y1 = (I - a L1) F
///   Y2 = (I - p a/(1+p) L1) F (I - b L2)
std::pair<DenseMatrix, DenseMatrix> admm_one_step_closed_form(const DenseMatrix& f,
                                                              const SparseMatrix& l1,
                                                              const DenseMatrix& l2,
                                                              const FilterParams& params);

/// ((1 + lambda2) I + lambda1 L1)^{-1} F: what the bi-filter solves when L2 = I.
DenseMatrix degenerate_filter(const DenseMatrix& f, const SparseMatrix& l1, double lambda1,
                              double lambda2);

}  // namespace bigcn
