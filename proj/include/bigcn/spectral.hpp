// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"

namespace bigcn {

/// Largest matrix order accepted by the dense eigensolver and smoothers.
inline constexpr Index kMaxDenseOrder = 2000;
/// Largest n*d accepted by the Kronecker Sylvester oracle.
inline constexpr Index kMaxKroneckerOrder = 4096;

struct EigenDecomposition {
  Vector eigenvalues;        // ascending
  DenseMatrix eigenvectors;  // orthonormal columns
};

/// Cyclic Jacobi rotations. Stops when the off-diagonal Frobenius norm drops
/// below 1e-12 * ||M||_F or after 100 sweeps.
EigenDecomposition symmetric_eig(const DenseMatrix& m);

/// Graph Fourier transform x_hat = U^T x.
Vector gft(const DenseMatrix& u, const Vector& x);
/// Inverse transform x = U x_hat.
Vector igft(const DenseMatrix& u, const Vector& x_hat);

/// U g(Lambda) U^T X.
DenseMatrix apply_spectral_filter(const SparseMatrix& laplacian, const std::function<double(double)>& g,
                                  const DenseMatrix& x);

/// Dense Cholesky factorization of a symmetric positive-definite matrix.
class Cholesky {
 public:
  explicit Cholesky(const DenseMatrix& spd);
  /// Solves A X = B.
  DenseMatrix solve(const DenseMatrix& b) const;
  Index order() const { return lower_.rows(); }

 private:
  DenseMatrix lower_;
};

/// Dense LU factorization with partial pivoting.
class LuFactorization {
 public:
  explicit LuFactorization(DenseMatrix a);
  /// Solves A X = B.
  DenseMatrix solve(const DenseMatrix& b) const;

 private:
  DenseMatrix lu_;
  std::vector<Index> pivots_;
};

/// (I + lambda L)^{-1} F, the minimizer of ||Y - F||^2 + lambda tr(Y^T L Y).
DenseMatrix exact_smoother(const SparseMatrix& laplacian, double lambda, const DenseMatrix& f);

/// Solves (I + lambda1 L1) Y + lambda2 Y L2 = F through the (nd x nd)
/// Kronecker system. Intended as a brute-force reference at small scale.
DenseMatrix sylvester_oracle(const SparseMatrix& l1, const DenseMatrix& l2, double lambda1,
                             double lambda2, const DenseMatrix& f);

/// ||Y - F + lambda1 L1 Y + lambda2 Y L2||_F.
double sylvester_residual(const SparseMatrix& l1, const DenseMatrix& l2, double lambda1,
                          double lambda2, const DenseMatrix& f, const DenseMatrix& y);

}  // namespace bigcn
