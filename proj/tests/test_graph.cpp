// SPDX-License-Identifier: Apache-2.0
#include "doctest.h"
#include "test_util.hpp"

using namespace bigcn;
using testutil::graph_of;
using testutil::max_abs;

TEST_CASE("sparse matrix validation") {
  CHECK_THROWS_AS(SparseMatrix(2, 2, {0, 1}, {0}, {1.0}), Error);                   // row_ptr too short
  CHECK_THROWS_AS(SparseMatrix(1, 3, {0, 2}, {2, 1}, {1.0, 1.0}), Error);           // unsorted columns
  CHECK_THROWS_AS(SparseMatrix(1, 2, {0, 1}, {5}, {1.0}), Error);                   // column out of range
  CHECK_THROWS_AS(SparseMatrix(1, 1, {0, 1}, {0}, {std::nan("")}), Error);          // non-finite
  CHECK_THROWS_AS(SparseMatrix::from_triplets(2, 2, {{0, 0, 1.0}, {0, 0, 2.0}}), Error);
  const SparseMatrix s = SparseMatrix::from_triplets(2, 3, {{1, 2, 4.0}, {0, 1, -1.0}});
  CHECK(s.nnz() == 2);
  CHECK(s.coeff(1, 2) == 4.0);
  CHECK(s.coeff(0, 0) == 0.0);
}

TEST_CASE("graph validation") {
  const std::vector<std::pair<Index, Index>> loop = {{1, 1}};
  CHECK_THROWS_AS(Graph::from_edges(2, loop), Error);
  const std::vector<std::pair<Index, Index>> dup = {{0, 1}, {1, 0}};
  CHECK_THROWS_AS(Graph::from_edges(2, dup), Error);
  CHECK_THROWS_AS(Graph(SparseMatrix::from_triplets(2, 2, {{0, 1, 1.0}})), Error);  // not symmetric
  const std::vector<std::pair<Index, Index>> e = {{0, 1}};
  const std::vector<double> w = {-1.0};
  CHECK_THROWS_AS(Graph::from_weighted_edges(2, e, w), Error);
}

TEST_CASE("degree vector") {
  CHECK(degree_vector(testutil::path2()) == Vector::Ones(2));
  CHECK(degree_vector(graph_of(3, {})) == Vector::Zero(3));
  CHECK(degree_vector(testutil::triangle()) == Vector::Constant(3, 2.0));
}

TEST_CASE("laplacian") {
  DenseMatrix want(2, 2);
  want << 1, -1, -1, 1;
  CHECK(laplacian(testutil::path2()).to_dense() == want);
  CHECK(max_abs(laplacian(graph_of(3, {})).to_dense()) == 0.0);
  const DenseMatrix lt = laplacian(testutil::triangle()).to_dense();
  DenseMatrix tri = 2.0 * DenseMatrix::Identity(3, 3) - testutil::triangle().adjacency().to_dense();
  CHECK(lt == tri);
  CHECK(max_abs(lt.rowwise().sum()) == 0.0);
}

TEST_CASE("normalized laplacian") {
  DenseMatrix want(2, 2);
  want << 1, -1, -1, 1;
  CHECK(max_abs(normalized_laplacian(testutil::path2()).to_dense() - want) < 1e-15);

  // node 2 isolated: its row is e_2
  const DenseMatrix l = normalized_laplacian(graph_of(3, {{0, 1}})).to_dense();
  CHECK(l(2, 0) == 0.0);
  CHECK(l(2, 1) == 0.0);
  CHECK(l(2, 2) == 1.0);

  const Eigen::VectorXd ev = testutil::reference_eigenvalues(normalized_laplacian(testutil::cycle4()).to_dense());
  CHECK(ev(0) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(ev(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(2) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ev(3) == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("smoothness examples") {
  const SparseMatrix l = laplacian(testutil::path2());
  DenseMatrix x(2, 1);
  x << 1, 1;
  CHECK(smoothness(l, x) == 0.0);
  x << 1, -1;
  CHECK(smoothness(l, x) == doctest::Approx(4.0));
  CHECK_THROWS_AS(smoothness(l, DenseMatrix::Zero(3, 1)), DimensionError);
}

TEST_CASE("spmm examples") {
  CounterRng rng(1, Stream::test_fixture);
  const DenseMatrix x = random_matrix(4, 3, rng);
  CHECK(spmm(SparseMatrix::identity(4), x) == x);
  CHECK(max_abs(spmm(SparseMatrix::zero(4, 4), x)) == 0.0);
  CHECK_THROWS_AS(spmm(SparseMatrix::identity(3), x), DimensionError);
  const SparseMatrix s = normalized_laplacian(random_graph(6, 0.4, rng));
  const DenseMatrix y = random_matrix(6, 2, rng);
  CHECK(max_abs(spmm(s, y) - s.to_dense() * y) < 1e-12);
  CHECK(max_abs(spmm_transposed(s, y) - s.to_dense().transpose() * y) < 1e-12);
}

TEST_CASE("properties over random graphs") {
  CounterRng rng(2, Stream::test_fixture);
  for (int t = 0; t < 20; ++t) {
    const Index n = 3 + static_cast<Index>(rng.below(10));
    const Graph g = random_graph(n, 0.3, rng, t % 2 == 0);
    const SparseMatrix l = laplacian(g);
    CHECK(max_abs(l.to_dense().rowwise().sum()) < 1e-12);

    const SparseMatrix nl = normalized_laplacian(g);
    CHECK(nl.is_symmetric(1e-15));
    for (int k = 0; k < 5; ++k) {
      const DenseMatrix v = random_matrix(n, 1, rng);
      CHECK((v.transpose() * nl.to_dense() * v)(0, 0) >= -1e-10);
    }

    // pairwise difference oracle
    const DenseMatrix x = random_matrix(n, 3, rng);
    const DenseMatrix a = g.adjacency().to_dense();
    double brute = 0.0;
    for (Index i = 0; i < n; ++i)
      for (Index j = 0; j < n; ++j) brute += 0.5 * a(i, j) * (x.row(i) - x.row(j)).squaredNorm();
    CHECK(std::abs(smoothness(l, x) - brute) <= 1e-10 * std::max(1.0, brute));

    DenseMatrix dense_x = random_matrix(n, 4, rng);
    CHECK(max_abs(spmm(nl, dense_x) - nl.to_dense() * dense_x) < 1e-12);
  }
}

TEST_CASE("edges are sorted with u < v") {
  const Graph g = graph_of(4, {{2, 3}, {1, 0}, {0, 3}});
  const auto e = g.edges();
  REQUIRE(e.size() == 3);
  CHECK(e[0] == std::pair<Index, Index>{0, 1});
  CHECK(e[1] == std::pair<Index, Index>{0, 3});
  CHECK(e[2] == std::pair<Index, Index>{2, 3});
  CHECK(g.num_edges() == 3);
  CHECK(g.has_edge(3, 0));
}
