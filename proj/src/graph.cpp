// SPDX-License-Identifier: Apache-2.0
#include "bigcn/graph.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bigcn {

SparseMatrix::SparseMatrix(Index n_rows, Index n_cols, std::vector<Index> row_ptr,
                           std::vector<Index> col_idx, std::vector<double> values)
    : n_rows_(n_rows),
      n_cols_(n_cols),
      row_ptr_(std::move(row_ptr)),
      col_idx_(std::move(col_idx)),
      values_(std::move(values)) {
  if (n_rows_ < 0 || n_cols_ < 0) throw DimensionError("SparseMatrix: negative dimension");
  if (static_cast<Index>(row_ptr_.size()) != n_rows_ + 1)
    throw FormatError("SparseMatrix: row_ptr must have n_rows+1 entries");
  if (row_ptr_.front() != 0) throw FormatError("SparseMatrix: row_ptr[0] must be 0");
  if (row_ptr_.back() != static_cast<Index>(values_.size()) || col_idx_.size() != values_.size())
    throw FormatError("SparseMatrix: row_ptr[n_rows] must equal nnz");
  for (Index i = 0; i < n_rows_; ++i) {
    if (row_ptr_[i + 1] < row_ptr_[i]) throw FormatError("SparseMatrix: row_ptr decreasing");
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      if (col_idx_[k] < 0 || col_idx_[k] >= n_cols_)
        throw FormatError("SparseMatrix: column index out of range in row " + std::to_string(i));
      if (k > row_ptr_[i] && col_idx_[k] <= col_idx_[k - 1])
        throw FormatError("SparseMatrix: columns not strictly increasing in row " +
                          std::to_string(i));
      if (!std::isfinite(values_[k])) throw NumericError("SparseMatrix: non-finite value");
    }
  }
}

SparseMatrix SparseMatrix::from_triplets(Index n_rows, Index n_cols, std::vector<Triplet> triplets) {
  std::sort(triplets.begin(), triplets.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  std::vector<Index> row_ptr(n_rows + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(triplets.size());
  values.reserve(triplets.size());
  for (std::size_t k = 0; k < triplets.size(); ++k) {
    const auto& t = triplets[k];
    if (t.row < 0 || t.row >= n_rows || t.col < 0 || t.col >= n_cols)
      throw FormatError("SparseMatrix: triplet out of range (" + std::to_string(t.row) + ", " +
                        std::to_string(t.col) + ")");
    if (k > 0 && triplets[k - 1].row == t.row && triplets[k - 1].col == t.col)
      throw FormatError("SparseMatrix: duplicate entry (" + std::to_string(t.row) + ", " +
                        std::to_string(t.col) + ")");
    ++row_ptr[t.row + 1];
    col_idx.push_back(t.col);
    values.push_back(t.value);
  }
  for (Index i = 0; i < n_rows; ++i) row_ptr[i + 1] += row_ptr[i];
  return SparseMatrix(n_rows, n_cols, std::move(row_ptr), std::move(col_idx), std::move(values));
}

SparseMatrix SparseMatrix::identity(Index n) {
  std::vector<Index> row_ptr(n + 1);
  std::vector<Index> col_idx(n);
  for (Index i = 0; i <= n; ++i) row_ptr[i] = i;
  for (Index i = 0; i < n; ++i) col_idx[i] = i;
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::vector<double>(n, 1.0));
}

SparseMatrix SparseMatrix::zero(Index n_rows, Index n_cols) {
  return SparseMatrix(n_rows, n_cols, std::vector<Index>(n_rows + 1, 0), {}, {});
}

SparseMatrix SparseMatrix::from_dense(const DenseMatrix& m) {
  std::vector<Index> row_ptr(m.rows() + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (m(i, j) != 0.0) {
        col_idx.push_back(j);
        values.push_back(m(i, j));
      }
    }
    row_ptr[i + 1] = static_cast<Index>(values.size());
  }
  return SparseMatrix(m.rows(), m.cols(), std::move(row_ptr), std::move(col_idx), std::move(values));
}

double SparseMatrix::coeff(Index i, Index j) const {
  const auto begin = col_idx_.begin() + row_ptr_[i];
  const auto end = col_idx_.begin() + row_ptr_[i + 1];
  const auto it = std::lower_bound(begin, end, j);
  if (it == end || *it != j) return 0.0;
  return values_[static_cast<std::size_t>(it - col_idx_.begin())];
}

DenseMatrix SparseMatrix::to_dense() const {
  DenseMatrix out = DenseMatrix::Zero(n_rows_, n_cols_);
  for (Index i = 0; i < n_rows_; ++i)
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) out(i, col_idx_[k]) = values_[k];
  return out;
}

bool SparseMatrix::is_symmetric(double tol) const {
  if (n_rows_ != n_cols_) return false;
  for (Index i = 0; i < n_rows_; ++i) {
    for (Index k = row_ptr_[i]; k < row_ptr_[i + 1]; ++k) {
      const Index j = col_idx_[k];
      if (std::abs(coeff(j, i) - values_[k]) > tol) return false;
    }
  }
  return true;
}

Graph::Graph(SparseMatrix adjacency) : adjacency_(std::move(adjacency)) {
  if (adjacency_.rows() != adjacency_.cols()) throw DimensionError("Graph: adjacency must be square");
  const auto rp = adjacency_.row_ptr();
  const auto ci = adjacency_.col_idx();
  const auto v = adjacency_.values();
  for (Index i = 0; i < adjacency_.rows(); ++i) {
    for (Index k = rp[i]; k < rp[i + 1]; ++k) {
      const Index j = ci[k];
      if (j == i) throw FormatError("Graph: self-loop at node " + std::to_string(i));
      if (!(v[k] > 0.0)) throw FormatError("Graph: edge weights must be positive");
      if (adjacency_.coeff(j, i) != v[k])
        throw FormatError("Graph: adjacency not symmetric at (" + std::to_string(i) + ", " +
                          std::to_string(j) + ")");
    }
  }
}

Graph Graph::from_edges(Index n, std::span<const std::pair<Index, Index>> edges) {
  std::vector<double> w(edges.size(), 1.0);
  return from_weighted_edges(n, edges, w);
}

Graph Graph::from_weighted_edges(Index n, std::span<const std::pair<Index, Index>> edges,
                                 std::span<const double> weights) {
  require_dims(edges.size() == weights.size(), "Graph: one weight per edge required");
  std::vector<Triplet> t;
  t.reserve(2 * edges.size());
  for (std::size_t k = 0; k < edges.size(); ++k) {
    const auto [u, v] = edges[k];
    if (u == v) throw FormatError("Graph: self-loop at node " + std::to_string(u));
    t.push_back({u, v, weights[k]});
    t.push_back({v, u, weights[k]});
  }
  return Graph(SparseMatrix::from_triplets(n, n, std::move(t)));
}

std::vector<std::pair<Index, Index>> Graph::edges() const {
  std::vector<std::pair<Index, Index>> out;
  out.reserve(static_cast<std::size_t>(num_edges()));
  const auto rp = adjacency_.row_ptr();
  const auto ci = adjacency_.col_idx();
  for (Index i = 0; i < num_nodes(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k)
      if (ci[k] > i) out.emplace_back(i, ci[k]);
  return out;
}

Vector degree_vector(const Graph& g) {
  const auto& a = g.adjacency();
  Vector d = Vector::Zero(g.num_nodes());
  for (Index i = 0; i < a.rows(); ++i)
    for (Index k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) d(i) += a.values()[k];
  return d;
}

namespace {

// Shared assembly for D - A style matrices: diagonal value per row, scaled
// off-diagonal entries.
template <typename DiagFn, typename OffFn>
SparseMatrix assemble_laplacian(const Graph& g, DiagFn diag, OffFn off) {
  const auto& a = g.adjacency();
  const Index n = g.num_nodes();
  std::vector<Index> row_ptr(n + 1, 0);
  std::vector<Index> col_idx;
  std::vector<double> values;
  col_idx.reserve(static_cast<std::size_t>(a.nnz() + n));
  values.reserve(static_cast<std::size_t>(a.nnz() + n));
  for (Index i = 0; i < n; ++i) {
    bool diag_done = false;
    for (Index k = a.row_ptr()[i]; k < a.row_ptr()[i + 1]; ++k) {
      const Index j = a.col_idx()[k];
      if (!diag_done && j > i) {
        col_idx.push_back(i);
        values.push_back(diag(i));
        diag_done = true;
      }
      col_idx.push_back(j);
      values.push_back(off(i, j, a.values()[k]));
    }
    if (!diag_done) {
      col_idx.push_back(i);
      values.push_back(diag(i));
    }
    row_ptr[i + 1] = static_cast<Index>(values.size());
  }
  return SparseMatrix(n, n, std::move(row_ptr), std::move(col_idx), std::move(values));
}

}  // namespace

SparseMatrix laplacian(const Graph& g) {
  const Vector d = degree_vector(g);
  return assemble_laplacian(
      g, [&](Index i) { return d(i); }, [](Index, Index, double w) { return -w; });
}

SparseMatrix normalized_laplacian(const Graph& g) {
  const Vector d = degree_vector(g);
  Vector inv_sqrt(d.size());
  for (Index i = 0; i < d.size(); ++i) inv_sqrt(i) = d(i) > 0.0 ? 1.0 / std::sqrt(d(i)) : 0.0;
  return assemble_laplacian(
      g, [](Index) { return 1.0; },
      [&](Index i, Index j, double w) { return -w * inv_sqrt(i) * inv_sqrt(j); });
}

double smoothness(const SparseMatrix& laplacian, const DenseMatrix& x) {
  require_dims(laplacian.rows() == laplacian.cols() && laplacian.cols() == x.rows(),
               "smoothness: L must be n x n and X n x d");
  const DenseMatrix lx = spmm(laplacian, x);
  return x.cwiseProduct(lx).sum();
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& x) {
  require_dims(s.cols() == x.rows(), "spmm: inner dimensions differ (" + std::to_string(s.cols()) +
                                         " vs " + std::to_string(x.rows()) + ")");
  DenseMatrix out = DenseMatrix::Zero(s.rows(), x.cols());
  const auto rp = s.row_ptr();
  const auto ci = s.col_idx();
  const auto v = s.values();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) out.row(i) += v[k] * x.row(ci[k]);
  return out;
}

DenseMatrix spmm_transposed(const SparseMatrix& s, const DenseMatrix& x) {
  require_dims(s.rows() == x.rows(), "spmm_transposed: dimension mismatch");
  DenseMatrix out = DenseMatrix::Zero(s.cols(), x.cols());
  const auto rp = s.row_ptr();
  const auto ci = s.col_idx();
  const auto v = s.values();
  for (Index i = 0; i < s.rows(); ++i)
    for (Index k = rp[i]; k < rp[i + 1]; ++k) out.row(ci[k]) += v[k] * x.row(i);
  return out;
}

}  // namespace bigcn
