// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <utility>
#include <vector>

#include "bigcn/core.hpp"

namespace bigcn {

struct Triplet {
  Index row;
  Index col;
  double value;
};

/// Compressed sparse row matrix. Column indices are strictly increasing
/// within each row and every stored value is finite.
class SparseMatrix {
 public:
  SparseMatrix() = default;
  SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> row_ptr, std::vector<Index> col_idx,
               std::vector<double> values);

  /// Builds from unordered triplets. Duplicate coordinates are rejected.
  static SparseMatrix from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> triplets);
  static SparseMatrix identity(Index n);
  static SparseMatrix zero(Index n_rows, Index n_cols);
  /// Keeps entries with |value| > 0.
  static SparseMatrix from_dense(const DenseMatrix& m);

  Index rows() const { return n_rows_; }
  Index cols() const { return n_cols_; }
  Index nnz() const { return static_cast<Index>(values_.size()); }

  std::span<const Index> row_ptr() const { return row_ptr_; }
  std::span<const Index> col_idx() const { return col_idx_; }
  std::span<const double> values() const { return values_; }

  /// Stored value or 0. Binary search within the row.
  double coeff(Index i, Index j) const;
  DenseMatrix to_dense() const;
  bool is_symmetric(double tol = 0.0) const;

 private:
  Index n_rows_ = 0;
  Index n_cols_ = 0;
  std::vector<Index> row_ptr_{0};
  std::vector<Index> col_idx_;
  std::vector<double> values_;
};

/// Undirected weighted graph without self-loops.
class Graph {
 public:
  Graph() = default;
  /// Validates symmetry, zero diagonal and positive weights.
  explicit Graph(SparseMatrix adjacency);

  /// Unit-weight graph. Each undirected pair must appear once (in either
  /// orientation); duplicates and self-loops throw FormatError.
  static Graph from_edges(Index n, std::span<const std::pair<Index, Index>> edges);
  static Graph from_weighted_edges(Index n, std::span<const std::pair<Index, Index>> edges,
                                   std::span<const double> weights);

  Index num_nodes() const { return adjacency_.rows(); }
  Index num_edges() const { return adjacency_.nnz() / 2; }
  const SparseMatrix& adjacency() const { return adjacency_; }
  bool has_edge(Index u, Index v) const { return adjacency_.coeff(u, v) != 0.0; }

  /// Undirected edge list with u < v, sorted lexicographically.
  std::vector<std::pair<Index, Index>> edges() const;

 private:
  SparseMatrix adjacency_;
};

Vector degree_vector(const Graph& g);

/// L = D - A.
SparseMatrix laplacian(const Graph& g);

/// L = I - D^{-1/2} A D^{-1/2}, with d^{-1/2} := 0 for isolated nodes so their
/// row is e_i^T.
SparseMatrix normalized_laplacian(const Graph& g);

/// trace(X^T L X).
double smoothness(const SparseMatrix& laplacian, const DenseMatrix& x);

/// Sparse times dense, accumulated row by row in column-index order.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x);

/// s^T x for a symmetric or general s, used for adjoints.
DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& x);

}  // namespace bigcn
