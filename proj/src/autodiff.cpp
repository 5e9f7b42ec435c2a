// SPDX-License-Identifier: Apache-2.0
#include "bigcn/autodiff.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace bigcn {

const DenseMatrix& Var::value() const { return tape_->value(*this); }

std::size_t Tape::checked(Var v) const {
  if (v.tape() != this || v.id() < 0 || static_cast<std::size_t>(v.id()) >= nodes_.size())
    throw Error("Tape: variable does not belong to this tape");
  return static_cast<std::size_t>(v.id());
}

Var Tape::constant(DenseMatrix value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, false});
  return Var(this, static_cast<Index>(nodes_.size() - 1));
}

Var Tape::variable(DenseMatrix value) {
  nodes_.push_back(Node{std::move(value), {}, nullptr, true});
  return Var(this, static_cast<Index>(nodes_.size() - 1));
}

Var Tape::record(DenseMatrix value, std::initializer_list<Var> parents, BackwardFn fn) {
  bool needs = false;
  for (Var p : parents) needs = needs || nodes_[checked(p)].requires_grad;
  nodes_.push_back(Node{std::move(value), {}, needs ? std::move(fn) : nullptr, needs});
  return Var(this, static_cast<Index>(nodes_.size() - 1));
}

void Tape::accumulate(Var v, const DenseMatrix& g) {
  Node& n = nodes_[checked(v)];
  if (!n.requires_grad) return;
  require_dims(g.rows() == n.value.rows() && g.cols() == n.value.cols(),
               "Tape: adjoint shape differs from value shape");
  if (n.adjoint.size() == 0 && n.value.size() != 0) {
    n.adjoint = g;
  } else {
    n.adjoint += g;
  }
}

DenseMatrix Tape::grad(Var v) const {
  const Node& n = nodes_[checked(v)];
  if (n.adjoint.size() == 0) return DenseMatrix::Zero(n.value.rows(), n.value.cols());
  return n.adjoint;
}

std::size_t Tape::adjoint_count() const {
  return static_cast<std::size_t>(
      std::count_if(nodes_.begin(), nodes_.end(), [](const Node& n) { return n.adjoint.size() != 0; }));
}

void Tape::backward(Var loss) {
  const std::size_t root = checked(loss);
  if (nodes_[root].value.rows() != 1 || nodes_[root].value.cols() != 1)
    throw DimensionError("Tape::backward: loss must be 1x1");
  for (auto& n : nodes_) n.adjoint.resize(0, 0);
  if (!nodes_[root].requires_grad) return;
  nodes_[root].adjoint = DenseMatrix::Ones(1, 1);
  for (std::size_t i = root + 1; i-- > 0;) {
    Node& n = nodes_[i];
    if (n.adjoint.size() == 0 || !n.backward) continue;
    // Callbacks only accumulate into earlier nodes; nodes_ is not resized here.
    n.backward(*this, n.adjoint);
  }
}

namespace {

Tape& same_tape(Var a, Var b) {
  if (a.tape() == nullptr || a.tape() != b.tape()) throw Error("autodiff: operands on different tapes");
  return *a.tape();
}

void same_shape(const DenseMatrix& a, const DenseMatrix& b, const char* op) {
  require_dims(a.rows() == b.rows() && a.cols() == b.cols(),
               std::string(op) + ": shape mismatch " + std::to_string(a.rows()) + "x" +
                   std::to_string(a.cols()) + " vs " + std::to_string(b.rows()) + "x" +
                   std::to_string(b.cols()));
}

DenseMatrix scalar(double v) { return DenseMatrix::Constant(1, 1, v); }

}  // namespace

Var matmul(Var a, Var b) {
  Tape& t = same_tape(a, b);
  require_dims(a.cols() == b.rows(), "matmul: inner dimensions differ");
  DenseMatrix out = a.value() * b.value();
  return t.record(std::move(out), {a, b}, [a, b](Tape& tp, const DenseMatrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g * b.value().transpose());
    if (tp.requires_grad(b)) tp.accumulate(b, a.value().transpose() * g);
  });
}

Var spmm(const SparseMatrix& s, Var x) {
  Tape& t = *x.tape();
  const SparseMatrix* sp = &s;
  return t.record(spmm(s, x.value()), {x}, [sp, x](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(x, spmm_transposed(*sp, g));
  });
}

Var add(Var a, Var b) {
  Tape& t = same_tape(a, b);
  same_shape(a.value(), b.value(), "add");
  return t.record(a.value() + b.value(), {a, b}, [a, b](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(a, g);
    tp.accumulate(b, g);
  });
}

Var sub(Var a, Var b) {
  Tape& t = same_tape(a, b);
  same_shape(a.value(), b.value(), "sub");
  return t.record(a.value() - b.value(), {a, b}, [a, b](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(a, g);
    if (tp.requires_grad(b)) tp.accumulate(b, -g);
  });
}

Var scale(Var a, double c) {
  return a.tape()->record(c * a.value(), {a},
                          [a, c](Tape& tp, const DenseMatrix& g) { tp.accumulate(a, c * g); });
}

Var transpose(Var a) {
  return a.tape()->record(a.value().transpose(), {a}, [a](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(a, g.transpose());
  });
}

Var sigmoid(Var a) {
  DenseMatrix out = a.value().unaryExpr([](double x) {
    // split on sign so exp never overflows
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
  });
  Tape& t = *a.tape();
  const Index id_next = static_cast<Index>(t.size());
  return t.record(std::move(out), {a}, [a, id_next](Tape& tp, const DenseMatrix& g) {
    const DenseMatrix& y = tp.value(Var(&tp, id_next));
    tp.accumulate(a, g.cwiseProduct(y.cwiseProduct((1.0 - y.array()).matrix())));
  });
}

Var relu(Var a) {
  DenseMatrix out = a.value().cwiseMax(0.0);
  return a.tape()->record(std::move(out), {a}, [a](Tape& tp, const DenseMatrix& g) {
    const DenseMatrix mask = (a.value().array() > 0.0).cast<double>().matrix();
    tp.accumulate(a, g.cwiseProduct(mask));
  });
}

namespace {

DenseMatrix softmax_rows(const DenseMatrix& x) {
  DenseMatrix out(x.rows(), x.cols());
  for (Index i = 0; i < x.rows(); ++i) {
    const double m = x.row(i).maxCoeff();
    out.row(i) = (x.row(i).array() - m).exp().matrix();
    out.row(i) /= out.row(i).sum();
  }
  return out;
}

}  // namespace

Var row_softmax(Var a) {
  Tape& t = *a.tape();
  DenseMatrix y = softmax_rows(a.value());
  const Index id_next = static_cast<Index>(t.size());
  return t.record(std::move(y), {a}, [a, id_next](Tape& tp, const DenseMatrix& g) {
    const DenseMatrix& s = tp.value(Var(&tp, id_next));
    const Vector dots = g.cwiseProduct(s).rowwise().sum();
    DenseMatrix ga = s.cwiseProduct(g.colwise() - dots);
    tp.accumulate(a, ga);
  });
}

Var hadamard(Var a, Var b) {
  Tape& t = same_tape(a, b);
  same_shape(a.value(), b.value(), "hadamard");
  return t.record(a.value().cwiseProduct(b.value()), {a, b}, [a, b](Tape& tp, const DenseMatrix& g) {
    if (tp.requires_grad(a)) tp.accumulate(a, g.cwiseProduct(b.value()));
    if (tp.requires_grad(b)) tp.accumulate(b, g.cwiseProduct(a.value()));
  });
}

Var gather_rows(Var a, std::vector<Index> rows) {
  const DenseMatrix& x = a.value();
  DenseMatrix out(static_cast<Index>(rows.size()), x.cols());
  for (std::size_t k = 0; k < rows.size(); ++k) {
    require_dims(rows[k] >= 0 && rows[k] < x.rows(), "gather_rows: index out of range");
    out.row(static_cast<Index>(k)) = x.row(rows[k]);
  }
  return a.tape()->record(std::move(out), {a}, [a, rows = std::move(rows)](Tape& tp, const DenseMatrix& g) {
    DenseMatrix ga = DenseMatrix::Zero(a.rows(), a.cols());
    for (std::size_t k = 0; k < rows.size(); ++k) ga.row(rows[k]) += g.row(static_cast<Index>(k));
    tp.accumulate(a, ga);
  });
}

Var row_sum(Var a) {
  DenseMatrix out = a.value().rowwise().sum();
  return a.tape()->record(std::move(out), {a}, [a](Tape& tp, const DenseMatrix& g) {
    DenseMatrix ga = g.col(0).replicate(1, a.cols());
    tp.accumulate(a, ga);
  });
}

Var sum(Var a) {
  return a.tape()->record(scalar(a.value().sum()), {a}, [a](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(a, DenseMatrix::Constant(a.rows(), a.cols(), g(0, 0)));
  });
}

Var mean(Var a) {
  const double count = static_cast<double>(a.value().size());
  if (count == 0) throw DimensionError("mean: empty matrix");
  return a.tape()->record(scalar(a.value().sum() / count), {a}, [a, count](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(a, DenseMatrix::Constant(a.rows(), a.cols(), g(0, 0) / count));
  });
}

Var abs_sum(Var a) {
  return a.tape()->record(scalar(a.value().cwiseAbs().sum()), {a}, [a](Tape& tp, const DenseMatrix& g) {
    const DenseMatrix sign = a.value().unaryExpr([](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); });
    tp.accumulate(a, g(0, 0) * sign);
  });
}

Var sym_normalize(Var a) {
  const DenseMatrix& x = a.value();
  require_dims(x.rows() == x.cols(), "sym_normalize: matrix must be square");
  const Index n = x.rows();
  Vector s(n);
  const Vector deg = x.rowwise().sum();
  for (Index i = 0; i < n; ++i) s(i) = deg(i) > 0.0 ? 1.0 / std::sqrt(deg(i)) : 0.0;
  DenseMatrix out = s.asDiagonal() * x * s.asDiagonal();
  return a.tape()->record(std::move(out), {a}, [a, s](Tape& tp, const DenseMatrix& g) {
    const DenseMatrix& x = a.value();
    const Index n = x.rows();
    // direct term through A
    DenseMatrix ga = s.asDiagonal() * g * s.asDiagonal();
    // dL/ds_i over both the row and column occurrences of s_i
    const DenseMatrix gx = g.cwiseProduct(x);
    const Vector ds = gx * s + gx.transpose() * s;
    // s_i = deg_i^{-1/2}: ds_i/ddeg_i = -s_i^3 / 2, and deg_i = sum_k A_ik
    for (Index i = 0; i < n; ++i) {
      if (s(i) == 0.0) continue;
      const double ddeg = -0.5 * s(i) * s(i) * s(i) * ds(i);
      ga.row(i).array() += ddeg;
    }
    tp.accumulate(a, ga);
  });
}

Var solve_left(std::shared_ptr<const Cholesky> factor, Var x) {
  require_dims(factor->order() == x.rows(), "solve_left: dimension mismatch");
  DenseMatrix out = factor->solve(x.value());
  return x.tape()->record(std::move(out), {x}, [factor, x](Tape& tp, const DenseMatrix& g) {
    tp.accumulate(x, factor->solve(g));
  });
}

Var solve_right(Var m, Var b) {
  Tape& t = same_tape(m, b);
  require_dims(b.rows() == b.cols() && m.cols() == b.rows(), "solve_right: dimension mismatch");
  // Y = M B^{-1}  <=>  B^T Y^T = M^T
  auto bt_lu = std::make_shared<LuFactorization>(b.value().transpose());
  DenseMatrix y = bt_lu->solve(m.value().transpose()).transpose();
  const Index id_next = static_cast<Index>(t.size());
  return t.record(std::move(y), {m, b}, [m, b, bt_lu, id_next](Tape& tp, const DenseMatrix& g) {
    // G B^{-T} = (B^{-1} G^T)^T
    const LuFactorization b_lu(b.value());
    const DenseMatrix gbt = b_lu.solve(g.transpose()).transpose();
    if (tp.requires_grad(m)) tp.accumulate(m, gbt);
    if (tp.requires_grad(b)) {
      const DenseMatrix& y = tp.value(Var(&tp, id_next));
      tp.accumulate(b, -(y.transpose() * gbt));
    }
  });
}

Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const Index> rows) {
  const DenseMatrix& x = logits.value();
  if (rows.empty()) throw Error("softmax_cross_entropy: empty mask");
  require_dims(static_cast<Index>(labels.size()) == x.rows(), "softmax_cross_entropy: one label per row");
  double loss = 0.0;
  for (Index r : rows) {
    const int y = labels[static_cast<std::size_t>(r)];
    if (y < 0 || y >= x.cols()) throw Error("softmax_cross_entropy: label out of range at row " + std::to_string(r));
    const double m = x.row(r).maxCoeff();
    const double lse = m + std::log((x.row(r).array() - m).exp().sum());
    loss += lse - x(r, y);
  }
  const double count = static_cast<double>(rows.size());
  std::vector<Index> row_copy(rows.begin(), rows.end());
  std::vector<int> label_copy(labels.begin(), labels.end());
  return logits.tape()->record(
      scalar(loss / count), {logits},
      [logits, row_copy = std::move(row_copy), label_copy = std::move(label_copy), count](
          Tape& tp, const DenseMatrix& g) {
        const DenseMatrix& x = logits.value();
        DenseMatrix gl = DenseMatrix::Zero(x.rows(), x.cols());
        for (Index r : row_copy) {
          const double m = x.row(r).maxCoeff();
          DenseMatrix p = (x.row(r).array() - m).exp().matrix();
          p /= p.sum();
          p(0, label_copy[static_cast<std::size_t>(r)]) -= 1.0;
          gl.row(r) += (g(0, 0) / count) * p;
        }
        tp.accumulate(logits, gl);
      });
}

Var bce_with_logits(Var scores, std::span<const int> labels) {
  const DenseMatrix& s = scores.value();
  require_dims(s.cols() == 1 && static_cast<std::size_t>(s.rows()) == labels.size(),
               "bce_with_logits: scores must be an m x 1 column matching labels");
  if (labels.empty()) throw Error("bce_with_logits: no examples");
  double loss = 0.0;
  for (std::size_t k = 0; k < labels.size(); ++k) {
    const int y = labels[k];
    if (y != 0 && y != 1) throw Error("bce_with_logits: label must be 0 or 1");
    const double x = s(static_cast<Index>(k), 0);
    // log(1 + e^x) - y x, evaluated stably
    loss += std::max(x, 0.0) + std::log1p(std::exp(-std::abs(x))) - y * x;
  }
  const double count = static_cast<double>(labels.size());
  std::vector<int> label_copy(labels.begin(), labels.end());
  return scores.tape()->record(scalar(loss / count), {scores},
                               [scores, label_copy = std::move(label_copy), count](Tape& tp, const DenseMatrix& g) {
                                 const DenseMatrix& s = scores.value();
                                 DenseMatrix gs(s.rows(), 1);
                                 for (Index k = 0; k < s.rows(); ++k) {
                                   const double x = s(k, 0);
                                   const double p = x >= 0.0 ? 1.0 / (1.0 + std::exp(-x))
                                                             : std::exp(x) / (1.0 + std::exp(x));
                                   gs(k, 0) = (p - label_copy[static_cast<std::size_t>(k)]) * g(0, 0) / count;
                                 }
                                 tp.accumulate(scores, gs);
                               });
}

std::vector<DenseMatrix> gradients(const LossBuilder& build, const std::vector<DenseMatrix>& params) {
  Tape tape;
  std::vector<Var> vars;
  vars.reserve(params.size());
  for (const auto& p : params) vars.push_back(tape.variable(p));
  const Var loss = build(tape, vars);
  tape.backward(loss);
  std::vector<DenseMatrix> out;
  out.reserve(vars.size());
  for (Var v : vars) out.push_back(tape.grad(v));
  return out;
}

double grad_check(const LossBuilder& build, const std::vector<DenseMatrix>& params, double h) {
  const std::vector<DenseMatrix> analytic = gradients(build, params);
  auto evaluate = [&](const std::vector<DenseMatrix>& ps) {
    Tape tape;
    std::vector<Var> vars;
    for (const auto& p : ps) vars.push_back(tape.constant(p));
    return build(tape, vars).value()(0, 0);
  };
  double worst = 0.0;
  std::vector<DenseMatrix> work = params;
  for (std::size_t k = 0; k < params.size(); ++k) {
    for (Index i = 0; i < params[k].rows(); ++i) {
      for (Index j = 0; j < params[k].cols(); ++j) {
        const double orig = params[k](i, j);
        work[k](i, j) = orig + h;
        const double up = evaluate(work);
        work[k](i, j) = orig - h;
        const double down = evaluate(work);
        work[k](i, j) = orig;
        const double fd = (up - down) / (2.0 * h);
        worst = std::max(worst, std::abs(analytic[k](i, j) - fd) / std::max(1.0, std::abs(fd)));
      }
    }
  }
  return worst;
}

}  // namespace bigcn
