// SPDX-License-Identifier: Apache-2.0
#include "bigcn/oracles.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <set>

#include "bigcn/autodiff.hpp"
#include "bigcn/model.hpp"
#include "bigcn/spectral.hpp"

namespace bigcn {

Graph random_graph(Index n, double density, CounterRng& rng, bool connected) {
  std::vector<std::pair<Index, Index>> edges;
  for (Index u = 0; u < n; ++u)
    for (Index v = u + 1; v < n; ++v)
      if ((connected && v == u + 1) || rng.bernoulli(density)) edges.emplace_back(u, v);
  return Graph::from_edges(n, edges);
}

DenseMatrix random_matrix(Index rows, Index cols, CounterRng& rng, double scale) {
  DenseMatrix m(rows, cols);
  for (Index i = 0; i < rows; ++i)
    for (Index j = 0; j < cols; ++j) m(i, j) = scale * rng.normal();
  return m;
}

DenseMatrix random_feature_laplacian(Index d, CounterRng& rng) {
  return build_learnable_L2(random_matrix(d, d, rng, 2.0));
}

bool OracleReport::passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const OracleResult& r) { return r.passed; });
}

std::size_t OracleReport::family_count() const {
  std::set<std::string> names;
  for (const auto& c : checks) names.insert(c.family);
  return names.size();
}

void OracleReport::print(std::ostream& out) const {
  const auto flags = out.flags();
  for (const auto& c : checks) {
    out << (c.passed ? "PASS " : "FAIL ") << std::left << std::setw(18) << c.family << std::setw(36) << c.name
        << " residual " << std::scientific << std::setprecision(3) << c.residual << " tol " << c.tolerance << '\n';
    out.flags(flags);
  }
  out << family_count() << " families, " << checks.size() << " checks, "
      << (passed() ? "all passed" : "FAILURES") << '\n';
}

namespace {

double rel_error(const DenseMatrix& got, const DenseMatrix& want) {
  return (got - want).norm() / std::max(want.norm(), 1e-300);
}

class Registry {
 public:
  explicit Registry(OracleReport& report) : report_(report) {}

  void add(std::string family, std::string name, double residual, double tol) {
    const bool ok = std::isfinite(residual) && residual < tol;
    report_.checks.push_back({std::move(family), std::move(name), residual, tol, ok});
  }

  // Runs a check body; an exception is reported as a failure of that check.
  template <typename F>
  void guarded(const std::string& family, const std::string& name, double tol, F&& body) {
    try {
      add(family, name, body(), tol);
    } catch (const std::exception&) {
      add(family, name, std::numeric_limits<double>::infinity(), tol);
    }
  }

 private:
  OracleReport& report_;
};

// Loss = sum(C .* out) for a fixed random C, so every output entry matters.
Var weighted_sum(Tape& tape, Var out, std::uint64_t salt) {
  CounterRng rng(salt, Stream::test_fixture);
  return sum(hadamard(out, tape.constant(random_matrix(out.rows(), out.cols(), rng))));
}

}  // namespace

OracleReport oracle_check(const AdmmFn& admm, std::uint64_t seed) {
  OracleReport report;
  Registry reg(report);
  CounterRng rng(seed, Stream::test_fixture);

  // graph_core: smoothness against the pairwise sum, spmm against densify.
  reg.guarded("pairwise_sum", "graph.smoothness", 1e-10, [&] {
    const Graph g = random_graph(5, 0.5, rng);
    const DenseMatrix x = random_matrix(5, 3, rng);
    double brute = 0.0;
    const DenseMatrix a = g.adjacency().to_dense();
    for (Index i = 0; i < 5; ++i)
      for (Index j = 0; j < 5; ++j) brute += 0.5 * a(i, j) * (x.row(i) - x.row(j)).squaredNorm();
    return std::abs(smoothness(laplacian(g), x) - brute) / std::max(1.0, brute);
  });
  reg.guarded("densify", "graph.spmm", 1e-12, [&] {
    const SparseMatrix s = normalized_laplacian(random_graph(6, 0.4, rng));
    const DenseMatrix x = random_matrix(6, 4, rng);
    return (spmm(s, x) - s.to_dense() * x).cwiseAbs().maxCoeff();
  });

  // spectral_core
  reg.guarded("reconstruction", "spectral.symmetric_eig", 1e-10, [&] {
    DenseMatrix m = random_matrix(8, 8, rng);
    m = (m + m.transpose()).eval();
    const EigenDecomposition e = symmetric_eig(m);
    const DenseMatrix back = e.eigenvectors * e.eigenvalues.asDiagonal() * e.eigenvectors.transpose();
    const DenseMatrix ortho = e.eigenvectors.transpose() * e.eigenvectors - DenseMatrix::Identity(8, 8);
    return std::max((back - m).cwiseAbs().maxCoeff(), ortho.cwiseAbs().maxCoeff());
  });
  reg.guarded("round_trip", "spectral.gft_igft", 1e-12, [&] {
    const EigenDecomposition e = symmetric_eig(normalized_laplacian(random_graph(6, 0.5, rng)).to_dense());
    const Vector x = random_matrix(6, 1, rng).col(0);
    return (igft(e.eigenvectors, gft(e.eigenvectors, x)) - x).cwiseAbs().maxCoeff();
  });
  reg.guarded("spectral_filter", "spectral.exact_smoother", 1e-10, [&] {
    const SparseMatrix l = normalized_laplacian(random_graph(7, 0.4, rng));
    const DenseMatrix f = random_matrix(7, 3, rng);
    const double lambda = 1.3;
    return rel_error(exact_smoother(l, lambda, f),
                     apply_spectral_filter(l, [&](double ev) { return 1.0 / (1.0 + lambda * ev); }, f));
  });
  reg.guarded("rayleigh", "spectral.low_pass", 0.5, [&] {
    int violations = 0;
    for (int t = 0; t < 100; ++t) {
      const SparseMatrix l = normalized_laplacian(random_graph(6, 0.4, rng));
      const DenseMatrix x = random_matrix(6, 1, rng);
      const DenseMatrix y = exact_smoother(l, 0.1 + 2.0 * rng.uniform(), x);
      const double in = (x.transpose() * spmm(l, x))(0, 0) / x.squaredNorm();
      const double out = (y.transpose() * spmm(l, y))(0, 0) / y.squaredNorm();
      if (out > in + 1e-12) ++violations;
    }
    return static_cast<double>(violations);
  });
  reg.guarded("residual", "spectral.sylvester_oracle", 1e-8, [&] {
    const SparseMatrix l1 = normalized_laplacian(random_graph(5, 0.5, rng));
    const DenseMatrix l2 = random_feature_laplacian(4, rng);
    const DenseMatrix f = random_matrix(5, 4, rng);
    return sylvester_residual(l1, l2, 0.7, 1.1, f, sylvester_oracle(l1, l2, 0.7, 1.1, f));
  });

  // bifilter: ADMM against the Kronecker solve.
  {
    double worst = 0.0;
    bool threw = false;
    for (double p : {1.0, 3.0, 8.5}) {
      for (double lam : {0.5, 1.0}) {
        try {
          const Index n = 4 + static_cast<Index>(rng.below(5));
          const Index d = 3 + static_cast<Index>(rng.below(6));
          const SparseMatrix l1 = normalized_laplacian(random_graph(n, 0.4, rng));
          const DenseMatrix l2 = random_feature_laplacian(d, rng);
          const DenseMatrix f = random_matrix(n, d, rng);
          const FilterParams fp{lam, lam, p, 500, FilterVariant::exact};
          worst = std::max(worst, rel_error(admm(f, l1, l2, fp).y, sylvester_oracle(l1, l2, lam, lam, f)));
        } catch (const std::exception&) {
          threw = true;
        }
      }
    }
    reg.add("kronecker", "bifilter.admm_exact_k500", threw ? std::numeric_limits<double>::infinity() : worst, 1e-6);
  }
  reg.guarded("closed_form", "bifilter.admm_one_step", 1e-12, [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const SparseMatrix l1 = normalized_laplacian(random_graph(6, 0.4, rng));
      const DenseMatrix l2 = random_feature_laplacian(4, rng);
      const DenseMatrix f = random_matrix(6, 4, rng);
      const FilterParams fp = FilterParams::from_lambda(0.3 + rng.uniform(), 0.5 + 4.0 * rng.uniform(), 1);
      const AdmmResult r = admm(f, l1, l2, fp);
      if (r.trace.y1.empty() || r.trace.y2.empty()) throw Error("admm returned no iteration trace");
      const auto [y1, y2] = admm_one_step_closed_form(f, l1, l2, fp);
      const double scale = std::max(1.0, f.norm());
      worst = std::max({worst, (r.trace.y1.back() - y1).norm() / scale, (r.trace.y2.back() - y2).norm() / scale,
                        (r.y - 0.5 * (y1 + y2)).norm() / scale});
    }
    return worst;
  });
  reg.guarded("degeneration", "bifilter.degenerate_filter", 1e-10, [&] {
    const Index n = 6;
    const Index d = 4;
    const SparseMatrix l1 = normalized_laplacian(random_graph(n, 0.4, rng));
    const DenseMatrix f = random_matrix(n, d, rng);
    const DenseMatrix eye = DenseMatrix::Identity(d, d);
    return rel_error(degenerate_filter(f, l1, 0.9, 0.6), sylvester_oracle(l1, eye, 0.9, 0.6, f));
  });
  reg.guarded("degeneration", "bifilter.admm_identity_l2", 1e-6, [&] {
    const SparseMatrix l1 = normalized_laplacian(random_graph(6, 0.4, rng));
    const DenseMatrix f = random_matrix(6, 3, rng);
    const FilterParams fp{0.9, 0.6, 2.0, 500, FilterVariant::exact};
    return rel_error(admm(f, l1, DenseMatrix::Identity(3, 3), fp).y, degenerate_filter(f, l1, 0.9, 0.6));
  });

  // autodiff: each primitive through a weighted-sum loss.
  {
    const DenseMatrix a = random_matrix(4, 3, rng);
    const DenseMatrix b = random_matrix(3, 5, rng);
    const DenseMatrix c = random_matrix(4, 3, rng);
    const DenseMatrix sq = random_matrix(3, 3, rng);
    DenseMatrix spd = random_matrix(3, 3, rng);
    spd = (spd * spd.transpose() + 3.0 * DenseMatrix::Identity(3, 3)).eval();
    DenseMatrix pos_sym = random_matrix(4, 4, rng).cwiseAbs();
    pos_sym = (pos_sym + pos_sym.transpose()).eval();
    pos_sym.diagonal().setZero();
    pos_sym.array() += 0.1;
    const SparseMatrix s = normalized_laplacian(random_graph(4, 0.5, rng));
    auto chol = std::make_shared<const Cholesky>(spd);
    const std::vector<int> labels = {0, 2, 1, 2};
    const std::vector<Index> rows = {0, 1, 3};
    const std::vector<int> bin = {1, 0, 1, 0};

    struct Case {
      std::string name;
      LossBuilder build;
      std::vector<DenseMatrix> params;
    };
    const std::vector<Case> cases = {
        {"matmul", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, matmul(v[0], v[1]), 1); }, {a, b}},
        {"spmm", [&](Tape& t, std::span<const Var> v) { return weighted_sum(t, spmm(s, v[0]), 2); }, {a}},
        {"add_sub", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, (v[0] + v[1]) - 2.0 * v[1], 3); },
         {a, c}},
        {"transpose", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, transpose(v[0]), 4); }, {a}},
        {"sigmoid", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, sigmoid(v[0]), 5); }, {a}},
        {"relu", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, relu(v[0]), 6); }, {a}},
        {"row_softmax", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, row_softmax(v[0]), 7); }, {a}},
        {"hadamard", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, hadamard(v[0], v[1]), 8); },
         {a, c}},
        {"gather_rows", [&](Tape& t, std::span<const Var> v) { return weighted_sum(t, gather_rows(v[0], rows), 9); },
         {a}},
        {"row_sum", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, row_sum(v[0]), 10); }, {a}},
        {"mean", [](Tape&, std::span<const Var> v) { return mean(hadamard(v[0], v[0])); }, {a}},
        {"abs_sum", [](Tape&, std::span<const Var> v) { return abs_sum(v[0]); }, {a}},
        {"sym_normalize", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, sym_normalize(v[0]), 11); },
         {pos_sym}},
        {"solve_left", [&](Tape& t, std::span<const Var> v) { return weighted_sum(t, solve_left(chol, v[0]), 12); },
         {random_matrix(3, 2, rng)}},
        {"solve_right", [](Tape& t, std::span<const Var> v) { return weighted_sum(t, solve_right(v[0], v[1]), 13); },
         {random_matrix(2, 3, rng), spd + 0.3 * sq}},
        {"softmax_cross_entropy",
         [&](Tape&, std::span<const Var> v) { return softmax_cross_entropy(v[0], labels, rows); }, {a}},
        {"bce_with_logits", [&](Tape&, std::span<const Var> v) { return bce_with_logits(v[0], bin); },
         {random_matrix(4, 1, rng)}},
    };
    for (const auto& c_ : cases)
      reg.guarded("finite_difference", "autodiff." + c_.name, 1e-4, [&] { return grad_check(c_.build, c_.params); });
  }

  // model: learnable L2 construction, full layer gradients, spectrum, limits.
  reg.guarded("finite_difference", "model.learnable_l2", 1e-6, [&] {
    return grad_check([](Tape& t, std::span<const Var> v) { return weighted_sum(t, build_learnable_L2(v[0]), 21); },
                      {random_matrix(5, 5, rng)});
  });
  reg.guarded("finite_difference", "model.bigcn_layer_taylor", 1e-5, [&] {
    const GraphContext graph(normalized_laplacian(random_graph(6, 0.4, rng)), FilterParams::from_lambda(0.8, 2.0));
    const DenseMatrix h = random_matrix(6, 4, rng);
    const FilterParams fp = FilterParams::from_lambda(0.8, 2.0);
    return grad_check(
        [&](Tape& t, std::span<const Var> v) {
          const Var out = bigcn_layer(t.constant(h), graph, build_learnable_L2(v[1]), v[0], fp, Activation::identity);
          return weighted_sum(t, out, 22);
        },
        {random_matrix(4, 3, rng, 0.5), random_matrix(4, 4, rng)});
  });
  reg.guarded("finite_difference", "model.bigcn_layer_exact", 1e-5, [&] {
    const FilterParams fp{0.6, 0.6, 2.0, 2, FilterVariant::exact};
    const GraphContext graph(normalized_laplacian(random_graph(6, 0.4, rng)), fp);
    const DenseMatrix h = random_matrix(6, 4, rng);
    return grad_check(
        [&](Tape& t, std::span<const Var> v) {
          const Var out = bigcn_layer(t.constant(h), graph, build_learnable_L2(v[1]), v[0], fp, Activation::identity);
          return weighted_sum(t, out, 23);
        },
        {random_matrix(4, 3, rng, 0.5), random_matrix(4, 4, rng)});
  });
  reg.guarded("spectrum", "model.l2_eigenvalues_in_0_2", 1e-10, [&] {
    double worst = 0.0;
    for (int t = 0; t < 10; ++t) {
      const Vector ev = symmetric_eig(random_feature_laplacian(6, rng)).eigenvalues;
      worst = std::max({worst, -ev.minCoeff(), ev.maxCoeff() - 2.0});
    }
    return std::max(worst, 0.0);
  });
  reg.guarded("limit", "model.large_p_is_gcn_baseline", 1e-5, [&] {
    const SparseMatrix l1 = normalized_laplacian(random_graph(6, 0.4, rng));
    FilterParams fp = FilterParams::from_lambda(0.7, 1e6, 1);
    fp.lambda2 = 0.0;
    const GraphContext graph(l1, fp);
    const DenseMatrix h = random_matrix(6, 4, rng);
    const DenseMatrix w = random_matrix(4, 3, rng);
    Tape t;
    const Var eye = t.constant(DenseMatrix::Identity(4, 4));
    const DenseMatrix got = bigcn_layer(t.constant(h), graph, eye, t.constant(w), fp, Activation::identity).value();
    const DenseMatrix want = gcn_baseline_layer(t.constant(h), l1, t.constant(w), 0.7, Activation::identity).value();
    return rel_error(got, want);
  });
  reg.guarded("degeneration", "model.identity_l2_is_gcn", 1e-8, [&] {
    const SparseMatrix l1 = normalized_laplacian(random_graph(6, 0.4, rng));
    const FilterParams fp{0.9, 0.5, 2.0, 300, FilterVariant::exact};
    const GraphContext graph(l1, fp);
    const DenseMatrix h = random_matrix(6, 4, rng);
    const DenseMatrix w = random_matrix(4, 3, rng);
    // ((1+l2) I + l1 L)^-1 H W = (I + l1/(1+l2) L)^-1 H (W / (1+l2))
    DenseMatrix m = l1.to_dense() * (fp.lambda1 / (1.0 + fp.lambda2));
    m += DenseMatrix::Identity(6, 6);
    Tape t;
    const Var eye = t.constant(DenseMatrix::Identity(4, 4));
    const DenseMatrix got = bigcn_layer(t.constant(h), graph, eye, t.constant(w), fp, Activation::identity).value();
    const DenseMatrix want = gcn_exact_layer(t.constant(h), std::make_shared<const Cholesky>(m),
                                             t.constant(w / (1.0 + fp.lambda2)), Activation::identity)
                                 .value();
    return rel_error(got, want);
  });
  return report;
}

}  // namespace bigcn
