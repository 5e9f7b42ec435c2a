// SPDX-License-Identifier: Apache-2.0
#include "bigcn/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace bigcn {

namespace {

void check_dense_order(Index n, const char* who) {
  if (n > kMaxDenseOrder)
    throw DimensionError(std::string(who) + ": order " + std::to_string(n) +
                         " exceeds the dense limit " + std::to_string(kMaxDenseOrder));
}

double off_diagonal_norm(const DenseMatrix& a) {
  double s = 0.0;
  for (Index i = 0; i < a.rows(); ++i)
    for (Index j = 0; j < a.cols(); ++j)
      if (i != j) s += a(i, j) * a(i, j);
  return std::sqrt(s);
}

}  // namespace

EigenDecomposition symmetric_eig(const DenseMatrix& m) {
  require_dims(m.rows() == m.cols(), "symmetric_eig: matrix must be square");
  check_dense_order(m.rows(), "symmetric_eig");
  const Index n = m.rows();
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  if ((m - m.transpose()).cwiseAbs().maxCoeff() > 1e-10 * scale)
    throw Error("symmetric_eig: input is not symmetric");

  DenseMatrix a = 0.5 * (m + m.transpose());
  DenseMatrix v = DenseMatrix::Identity(n, n);
  const double target = 1e-12 * a.norm();

  for (int sweep = 0; sweep < 100 && off_diagonal_norm(a) > target; ++sweep) {
    for (Index p = 0; p < n - 1; ++p) {
      for (Index q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Rotation angle that annihilates a(p, q).
        const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                         (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;
        for (Index k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Index k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        for (Index k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Index{0});
  std::stable_sort(order.begin(), order.end(), [&](Index i, Index j) { return a(i, i) < a(j, j); });

  EigenDecomposition out{Vector(n), DenseMatrix(n, n)};
  for (Index k = 0; k < n; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

Vector gft(const DenseMatrix& u, const Vector& x) {
  require_dims(u.rows() == x.size(), "gft: basis and signal sizes differ");
  return u.transpose() * x;
}

Vector igft(const DenseMatrix& u, const Vector& x_hat) {
  require_dims(u.cols() == x_hat.size(), "igft: basis and spectrum sizes differ");
  return u * x_hat;
}

DenseMatrix apply_spectral_filter(const SparseMatrix& laplacian, const std::function<double(double)>& g,
                                  const DenseMatrix& x) {
  require_dims(laplacian.cols() == x.rows(), "apply_spectral_filter: dimension mismatch");
  const EigenDecomposition eig = symmetric_eig(laplacian.to_dense());
  Vector response(eig.eigenvalues.size());
  for (Index i = 0; i < response.size(); ++i) response(i) = g(eig.eigenvalues(i));
  const DenseMatrix spectrum = eig.eigenvectors.transpose() * x;
  return eig.eigenvectors * (response.asDiagonal() * spectrum);
}

Cholesky::Cholesky(const DenseMatrix& spd) : lower_(DenseMatrix::Zero(spd.rows(), spd.cols())) {
  require_dims(spd.rows() == spd.cols(), "Cholesky: matrix must be square");
  const Index n = spd.rows();
  for (Index j = 0; j < n; ++j) {
    double diag = spd(j, j);
    for (Index k = 0; k < j; ++k) diag -= lower_(j, k) * lower_(j, k);
    if (!(diag > 0.0)) throw NumericError("Cholesky: matrix is not positive definite");
    const double ljj = std::sqrt(diag);
    lower_(j, j) = ljj;
    for (Index i = j + 1; i < n; ++i) {
      double s = spd(i, j);
      for (Index k = 0; k < j; ++k) s -= lower_(i, k) * lower_(j, k);
      lower_(i, j) = s / ljj;
    }
  }
}

DenseMatrix Cholesky::solve(const DenseMatrix& b) const {
  require_dims(b.rows() == lower_.rows(), "Cholesky::solve: dimension mismatch");
  const Index n = lower_.rows();
  DenseMatrix y = b;
  for (Index i = 0; i < n; ++i) {
    for (Index k = 0; k < i; ++k) y.row(i) -= lower_(i, k) * y.row(k);
    y.row(i) /= lower_(i, i);
  }
  for (Index i = n - 1; i >= 0; --i) {
    for (Index k = i + 1; k < n; ++k) y.row(i) -= lower_(k, i) * y.row(k);
    y.row(i) /= lower_(i, i);
  }
  return y;
}

LuFactorization::LuFactorization(DenseMatrix a) : lu_(std::move(a)), pivots_(lu_.rows()) {
  require_dims(lu_.rows() == lu_.cols(), "LuFactorization: matrix must be square");
  const Index n = lu_.rows();
  for (Index k = 0; k < n; ++k) {
    Index pivot = k;
    for (Index i = k + 1; i < n; ++i)
      if (std::abs(lu_(i, k)) > std::abs(lu_(pivot, k))) pivot = i;
    pivots_[k] = pivot;
    if (lu_(pivot, k) == 0.0) throw NumericError("LuFactorization: matrix is singular");
    if (pivot != k) lu_.row(k).swap(lu_.row(pivot));
    const double inv = 1.0 / lu_(k, k);
    for (Index i = k + 1; i < n; ++i) {
      const double factor = lu_(i, k) * inv;
      lu_(i, k) = factor;
      if (factor != 0.0) lu_.row(i).tail(n - k - 1) -= factor * lu_.row(k).tail(n - k - 1);
    }
  }
}

DenseMatrix LuFactorization::solve(const DenseMatrix& b) const {
  require_dims(b.rows() == lu_.rows(), "LuFactorization::solve: dimension mismatch");
  const Index n = lu_.rows();
  DenseMatrix x = b;
  for (Index k = 0; k < n; ++k)
    if (pivots_[k] != k) x.row(k).swap(x.row(pivots_[k]));
  for (Index i = 0; i < n; ++i)
    for (Index k = 0; k < i; ++k) x.row(i) -= lu_(i, k) * x.row(k);
  for (Index i = n - 1; i >= 0; --i) {
    for (Index k = i + 1; k < n; ++k) x.row(i) -= lu_(i, k) * x.row(k);
    x.row(i) /= lu_(i, i);
  }
  return x;
}

DenseMatrix exact_smoother(const SparseMatrix& laplacian, double lambda, const DenseMatrix& f) {
  require_dims(laplacian.rows() == laplacian.cols() && laplacian.cols() == f.rows(),
               "exact_smoother: dimension mismatch");
  check_dense_order(laplacian.rows(), "exact_smoother");
  if (lambda < 0.0) throw Error("exact_smoother: lambda must be non-negative");
  const Index n = laplacian.rows();
  const DenseMatrix system = DenseMatrix::Identity(n, n) + lambda * laplacian.to_dense();
  return Cholesky(system).solve(f);
}

DenseMatrix sylvester_oracle(const SparseMatrix& l1, const DenseMatrix& l2, double lambda1,
                             double lambda2, const DenseMatrix& f) {
  const Index n = f.rows();
  const Index d = f.cols();
  require_dims(l1.rows() == n && l1.cols() == n, "sylvester_oracle: L1 must be n x n");
  require_dims(l2.rows() == d && l2.cols() == d, "sylvester_oracle: L2 must be d x d");
  if (n * d > kMaxKroneckerOrder)
    throw DimensionError("sylvester_oracle: n*d = " + std::to_string(n * d) + " exceeds " +
                         std::to_string(kMaxKroneckerOrder));

  // vec() stacks columns: entry (i, j) of Y sits at j*n + i.
  const DenseMatrix a = DenseMatrix::Identity(n, n) + lambda1 * l1.to_dense();
  const Index m = n * d;
  DenseMatrix system = DenseMatrix::Zero(m, m);
  for (Index j = 0; j < d; ++j) {
    system.block(j * n, j * n, n, n) += a;
    for (Index jj = 0; jj < d; ++jj) {
      const double c = lambda2 * l2(jj, j);  // (L2^T)_{j, jj}
      if (c == 0.0) continue;
      for (Index i = 0; i < n; ++i) system(j * n + i, jj * n + i) += c;
    }
  }
  DenseMatrix rhs(m, 1);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) rhs(j * n + i, 0) = f(i, j);

  const DenseMatrix sol = LuFactorization(std::move(system)).solve(rhs);
  DenseMatrix y(n, d);
  for (Index j = 0; j < d; ++j)
    for (Index i = 0; i < n; ++i) y(i, j) = sol(j * n + i, 0);
  return y;
}

double sylvester_residual(const SparseMatrix& l1, const DenseMatrix& l2, double lambda1,
                          double lambda2, const DenseMatrix& f, const DenseMatrix& y) {
  return (y - f + lambda1 * spmm(l1, y) + lambda2 * y * l2).norm();
}

}  // namespace bigcn
