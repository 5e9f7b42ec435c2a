// SPDX-License-Identifier: Apache-2.0
#include <cmath>

#include "bigcn/spectral.hpp"
#include "doctest.h"
#include "test_util.hpp"

using namespace bigcn;
using testutil::max_abs;

TEST_CASE("symmetric_eig examples") {
  const EigenDecomposition id = symmetric_eig(DenseMatrix::Identity(3, 3));
  CHECK(max_abs(id.eigenvalues - Vector::Ones(3)) < 1e-15);

  const EigenDecomposition p = symmetric_eig(normalized_laplacian(testutil::path2()).to_dense());
  CHECK(p.eigenvalues(0) == doctest::Approx(0.0));
  CHECK(p.eigenvalues(1) == doctest::Approx(2.0));

  CounterRng rng(3, Stream::test_fixture);
  for (int t = 0; t < 5; ++t) {
    DenseMatrix m = random_matrix(8, 8, rng);
    m = (m + m.transpose()).eval();
    const EigenDecomposition e = symmetric_eig(m);
    CHECK(max_abs(e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose() - m) < 1e-10);
    CHECK((e.eigenvectors.transpose() * e.eigenvectors - DenseMatrix::Identity(8, 8)).norm() < 1e-8);
    for (Index i = 1; i < 8; ++i) CHECK(e.eigenvalues(i - 1) <= e.eigenvalues(i));
    CHECK(max_abs(e.eigenvalues - testutil::reference_eigenvalues(m)) < 1e-10);
  }
}

TEST_CASE("symmetric_eig errors") {
  DenseMatrix m(2, 2);
  m << 1, 2, 3, 1;
  CHECK_THROWS_AS(symmetric_eig(m), Error);
  CHECK_THROWS_AS(symmetric_eig(DenseMatrix::Zero(2, 3)), DimensionError);
  CHECK_THROWS_AS(symmetric_eig(DenseMatrix::Zero(kMaxDenseOrder + 1, kMaxDenseOrder + 1)), Error);
}

TEST_CASE("gft and igft") {
  DenseMatrix u(2, 2);
  const double r = 1.0 / std::sqrt(2.0);
  u << r, r, r, -r;
  Vector x(2);
  x << 1, 0;
  const Vector xh = gft(u, x);
  CHECK(xh(0) == doctest::Approx(r));
  CHECK(xh(1) == doctest::Approx(r));
  CHECK(max_abs(igft(u, xh) - x) < 1e-15);
  CHECK(max_abs(gft(u, u.col(1)) - Vector::Unit(2, 1)) < 1e-15);
  CHECK(max_abs(igft(u, Vector::Zero(2))) == 0.0);

  CounterRng rng(4, Stream::test_fixture);
  const EigenDecomposition e = symmetric_eig(normalized_laplacian(random_graph(6, 0.5, rng)).to_dense());
  const Vector y = random_matrix(6, 1, rng).col(0);
  CHECK(max_abs(igft(e.eigenvectors, gft(e.eigenvectors, y)) - y) < 1e-10);
  CHECK_THROWS_AS(gft(u, Vector::Zero(3)), DimensionError);
}

TEST_CASE("apply_spectral_filter") {
  CounterRng rng(5, Stream::test_fixture);
  const SparseMatrix l = normalized_laplacian(random_graph(5, 0.5, rng));
  const DenseMatrix x = random_matrix(5, 2, rng);
  CHECK(max_abs(apply_spectral_filter(l, [](double) { return 1.0; }, x) - x) < 1e-12);
  CHECK(max_abs(apply_spectral_filter(l, [](double) { return 0.0; }, x)) == 0.0);
  DenseMatrix f(2, 1);
  f << 3, 0;
  const DenseMatrix y = apply_spectral_filter(laplacian(testutil::path2()), [](double ev) { return 1.0 / (1.0 + ev); }, f);
  // (I + L) y = f with L = [[1,-1],[-1,1]]: 2y0 - y1 = 3, -y0 + 2y1 = 0
  CHECK(y(0, 0) == doctest::Approx(2.0));
  CHECK(y(1, 0) == doctest::Approx(1.0));
}

TEST_CASE("exact_smoother") {
  CounterRng rng(6, Stream::test_fixture);
  const SparseMatrix l = laplacian(random_graph(6, 0.4, rng));
  const DenseMatrix f = random_matrix(6, 3, rng);
  CHECK(max_abs(exact_smoother(l, 0.0, f) - f) < 1e-15);
  DenseMatrix f2(2, 1);
  f2 << 3, 0;
  const DenseMatrix y = exact_smoother(laplacian(testutil::path2()), 1.0, f2);
  CHECK(y(0, 0) == doctest::Approx(2.0));
  CHECK(y(1, 0) == doctest::Approx(1.0));
  const DenseMatrix c = DenseMatrix::Constant(6, 2, 1.7);
  CHECK(max_abs(exact_smoother(l, 2.5, c) - c) < 1e-12);
  CHECK_THROWS_AS(exact_smoother(l, -1.0, f), Error);
}

TEST_CASE("exact_smoother low-pass and argmin properties") {
  CounterRng rng(7, Stream::test_fixture);
  int violations = 0;
  for (int t = 0; t < 100; ++t) {
    const Index n = 4 + static_cast<Index>(rng.below(8));
    const SparseMatrix l = normalized_laplacian(random_graph(n, 0.35, rng));
    const DenseMatrix ld = l.to_dense();
    const DenseMatrix x = random_matrix(n, 1, rng);
    const DenseMatrix y = exact_smoother(l, 0.1 + 3.0 * rng.uniform(), x);
    const double rq_in = (x.transpose() * ld * x)(0, 0) / x.squaredNorm();
    const double rq_out = (y.transpose() * ld * y)(0, 0) / y.squaredNorm();
    if (rq_out > rq_in + 1e-12) ++violations;
  }
  CHECK(violations == 0);

  const SparseMatrix l = laplacian(random_graph(7, 0.4, rng));
  const DenseMatrix f = random_matrix(7, 2, rng);
  const double lambda = 0.8;
  auto objective = [&](const DenseMatrix& y) {
    return (y - f).squaredNorm() + lambda * (y.transpose() * l.to_dense() * y).trace();
  };
  const DenseMatrix y = exact_smoother(l, lambda, f);
  const double best = objective(y);
  for (int t = 0; t < 20; ++t) {
    DenseMatrix dir = random_matrix(7, 2, rng);
    dir /= dir.norm();
    CHECK(objective(y + 1e-3 * dir) >= best);
  }
}

TEST_CASE("sylvester oracle") {
  CounterRng rng(8, Stream::test_fixture);
  const SparseMatrix l1 = normalized_laplacian(random_graph(5, 0.5, rng));
  const DenseMatrix l2 = random_feature_laplacian(4, rng);
  const DenseMatrix f = random_matrix(5, 4, rng);
  CHECK(max_abs(sylvester_oracle(l1, l2, 0.0, 0.0, f) - f) < 1e-14);

  const DenseMatrix y = sylvester_oracle(l1, l2, 0.7, 1.3, f);
  CHECK(sylvester_residual(l1, l2, 0.7, 1.3, f, y) < 1e-8);
  CHECK(testutil::rel_frob(y, testutil::reference_sylvester(l1.to_dense(), l2, 0.7, 1.3, f)) < 1e-12);

  // L2 = I reduces to a single-direction smoother
  const DenseMatrix yi = sylvester_oracle(l1, DenseMatrix::Identity(4, 4), 0.9, 0.4, f);
  DenseMatrix m = 1.4 * DenseMatrix::Identity(5, 5) + 0.9 * l1.to_dense();
  CHECK(max_abs(yi - m.fullPivLu().solve(f)) < 1e-12);

  CHECK_THROWS_AS(sylvester_oracle(SparseMatrix::identity(65), DenseMatrix::Identity(64, 64), 1, 1,
                                   DenseMatrix::Zero(65, 64)),
                  Error);
}

TEST_CASE("cholesky and lu") {
  CounterRng rng(9, Stream::test_fixture);
  DenseMatrix a = random_matrix(5, 5, rng);
  const DenseMatrix spd = a * a.transpose() + DenseMatrix::Identity(5, 5);
  const DenseMatrix b = random_matrix(5, 2, rng);
  CHECK(max_abs(spd * Cholesky(spd).solve(b) - b) < 1e-10);
  CHECK(max_abs(a * LuFactorization(a).solve(b) - b) < 1e-9);
  DenseMatrix not_pd = -DenseMatrix::Identity(2, 2);
  CHECK_THROWS_AS(Cholesky{not_pd}, NumericError);
  CHECK_THROWS_AS(LuFactorization{DenseMatrix::Zero(3, 3)}, NumericError);
}
