// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "bigcn/core.hpp"
#include "bigcn/graph.hpp"
#include "bigcn/spectral.hpp"

namespace bigcn {

class Tape;

/// Handle to a node on a Tape. Cheap to copy; valid while its tape lives.
class Var {
 public:
  Var() = default;
  Var(Tape* tape, Index id) : tape_(tape), id_(id) {}

  Tape* tape() const { return tape_; }
  Index id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }
  const DenseMatrix& value() const;
  Index rows() const { return value().rows(); }
  Index cols() const { return value().cols(); }

 private:
  Tape* tape_ = nullptr;
  Index id_ = -1;
};

/// Define-by-run reverse-mode tape over dense matrices. Rebuilt for every
/// forward pass. Single-threaded.
class Tape {
 public:
  using BackwardFn = std::function<void(Tape&, const DenseMatrix& grad)>;

  Tape() = default;
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  /// Leaf that never receives gradient.
  Var constant(DenseMatrix value);
  /// Trainable leaf; its gradient is available after backward().
  Var variable(DenseMatrix value);

  const DenseMatrix& value(Var v) const { return nodes_[checked(v)].value; }
  bool requires_grad(Var v) const { return nodes_[checked(v)].requires_grad; }

  /// Gradient of the last backward() loss w.r.t. v. Zero if v did not
  /// influence the loss.
  DenseMatrix grad(Var v) const;

  /// Reverse sweep from a 1x1 loss. Throws DimensionError otherwise.
  void backward(Var loss);

  std::size_t size() const { return nodes_.size(); }
  /// Number of adjoint buffers currently allocated.
  std::size_t adjoint_count() const;

  /// Records an op. `parents` decide whether the result needs a gradient;
  /// `fn` is dropped when none of them do.
  Var record(DenseMatrix value, std::initializer_list<Var> parents, BackwardFn fn);

  /// Adds `g` into v's adjoint (no-op for nodes without requires_grad).
  void accumulate(Var v, const DenseMatrix& g);

 private:
  struct Node {
    DenseMatrix value;
    DenseMatrix adjoint;  // empty until first accumulation
    BackwardFn backward;
    bool requires_grad = false;
  };

  std::size_t checked(Var v) const;

  std::vector<Node> nodes_;
};

// Differentiable primitives. Operands must live on the same tape.
Var matmul(Var a, Var b);
/// s * x with s constant data; s must outlive the tape.
Var spmm(const SparseMatrix& s, Var x);
Var add(Var a, Var b);
Var sub(Var a, Var b);
Var scale(Var a, double c);
Var transpose(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var row_softmax(Var a);
Var hadamard(Var a, Var b);
/// Rows of a at the given indices, in order (duplicates allowed).
Var gather_rows(Var a, std::vector<Index> rows);
/// Column vector of row sums.
Var row_sum(Var a);
Var sum(Var a);
Var mean(Var a);
/// sum |a_ij|; subgradient 0 at 0.
Var abs_sum(Var a);
/// D^{-1/2} A D^{-1/2} with D = diag(row sums of A); rows with non-positive
/// degree get d^{-1/2} = 0.
Var sym_normalize(Var a);
/// (I + c S)^{-1} x for a constant SPD factorization (shared with the caller).
Var solve_left(std::shared_ptr<const Cholesky> factor, Var x);
/// m b^{-1}, differentiable in both m and b.
Var solve_right(Var m, Var b);
/// Mean softmax cross-entropy over the listed rows.
Var softmax_cross_entropy(Var logits, std::span<const int> labels, std::span<const Index> rows);
/// Mean binary cross-entropy of an (m x 1) logit column against 0/1 labels.
Var bce_with_logits(Var scores, std::span<const int> labels);

inline Var operator+(Var a, Var b) { return add(a, b); }
inline Var operator-(Var a, Var b) { return sub(a, b); }
inline Var operator*(double c, Var a) { return scale(a, c); }

/// Builds a scalar loss from the parameter leaves it is handed.
using LossBuilder = std::function<Var(Tape&, std::span<const Var>)>;

/// Max over entries of |g_reverse - g_fd| / max(1, |g_fd|) with central
/// differences of step h.
double grad_check(const LossBuilder& build, const std::vector<DenseMatrix>& params, double h = 1e-6);

/// Reverse-mode gradients of `build` at `params`.
std::vector<DenseMatrix> gradients(const LossBuilder& build, const std::vector<DenseMatrix>& params);

}  // namespace bigcn
