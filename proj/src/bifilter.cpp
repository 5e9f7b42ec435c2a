// SPDX-License-Identifier: Apache-2.0
#include "bigcn/bifilter.hpp"

#include <cmath>
#include <sstream>
#include <variant>

#include "bigcn/spectral.hpp"

namespace bigcn {

FilterParams FilterParams::from_lambda(double lambda, double p, int k, FilterVariant variant) {
  FilterParams out;
  out.lambda1 = lambda * (1.0 + p) / 2.0;
  out.lambda2 = out.lambda1;
  out.p = p;
  out.k = k;
  out.variant = variant;
  return out;
}

void FilterParams::validate() const {
  if (!(lambda1 >= 0.0) || !(lambda2 >= 0.0)) throw Error("FilterParams: lambdas must be >= 0");
  if (!(p > 0.0)) throw Error("FilterParams: p must be > 0");
  if (k < 1) throw Error("FilterParams: k must be >= 1");
}

std::optional<std::string> taylor_stability_warning(const FilterParams& params) {
  if (params.variant != FilterVariant::taylor) return std::nullopt;
  const double worst = 2.0 * std::max(params.node_coefficient(), params.feature_coefficient());
  if (worst <= 1.0) return std::nullopt;
  std::ostringstream msg;
  msg << "taylor filter: 2*lambda/(1+p)*lambda_max = " << worst
      << " exceeds 1; the first-order factors may have eigenvalues outside [-1, 1]";
  if (worst > 1.25) msg << " (beyond the 0.25 slack)";
  return msg.str();
}

namespace {

// Applies (I + c S)^{-1} from the left, with the factorization done once.
class LeftInverse {
 public:
  LeftInverse(const DenseMatrix& s, double c) {
    const DenseMatrix m = DenseMatrix::Identity(s.rows(), s.cols()) + c * s;
    try {
      factor_.emplace<Cholesky>(m);
    } catch (const NumericError&) {
      factor_.emplace<LuFactorization>(m);
    }
  }
  DenseMatrix apply(const DenseMatrix& x) const {
    return std::visit([&](const auto& f) -> DenseMatrix {
      if constexpr (std::is_same_v<std::decay_t<decltype(f)>, std::monostate>) {
        return x;
      } else {
        return f.solve(x);
      }
    }, factor_);
  }

 private:
  std::variant<std::monostate, Cholesky, LuFactorization> factor_;
};

void check_finite(const DenseMatrix& m, const char* name, int iteration) {
  if (!m.allFinite())
    throw NumericError(std::string("admm_bifilter: non-finite ") + name + " at iteration " +
                       std::to_string(iteration));
}

void check_shapes(const DenseMatrix& f, const SparseMatrix& l1, const DenseMatrix& l2) {
  require_dims(l1.rows() == f.rows() && l1.cols() == f.rows(), "bifilter: L1 must be n x n");
  require_dims(l2.rows() == f.cols() && l2.cols() == f.cols(), "bifilter: L2 must be d x d");
}

}  // namespace

AdmmResult admm_bifilter(const DenseMatrix& f, const SparseMatrix& l1, const DenseMatrix& l2,
                         const FilterParams& params) {
  params.validate();
  check_shapes(f, l1, l2);
  const double a = params.node_coefficient();
  const double b = params.feature_coefficient();
  const double p = params.p;
  const double scale = 1.0 / (1.0 + p);

  std::optional<LeftInverse> node_inverse;
  std::optional<LeftInverse> feature_inverse;
  if (params.variant == FilterVariant::exact) {
    node_inverse.emplace(l1.to_dense(), a);
    // (I + b L2) is symmetric, so M (I + b L2)^{-1} = ((I + b L2)^{-1} M^T)^T.
    feature_inverse.emplace(l2, b);
  }

  DenseMatrix y1 = f;
  DenseMatrix y2 = f;
  DenseMatrix z = DenseMatrix::Zero(f.rows(), f.cols());
  AdmmResult result;
  result.trace.y1.reserve(params.k);
  result.trace.y2.reserve(params.k);
  result.trace.z.reserve(params.k);

  for (int it = 0; it < params.k; ++it) {
    const DenseMatrix r1 = f + p * y2 + z;
    if (params.variant == FilterVariant::exact) {
      y1 = scale * node_inverse->apply(r1);
    } else {
      y1 = scale * (r1 - a * spmm(l1, r1));
    }
    check_finite(y1, "Y1", it + 1);

    const DenseMatrix r2 = f + p * y1 - z;
    if (params.variant == FilterVariant::exact) {
      y2 = scale * feature_inverse->apply(r2.transpose()).transpose();
    } else {
      y2 = scale * (r2 - b * (r2 * l2));
    }
    check_finite(y2, "Y2", it + 1);

    z += p * (y2 - y1);
    check_finite(z, "Z", it + 1);

    result.trace.y1.push_back(y1);
    result.trace.y2.push_back(y2);
    result.trace.z.push_back(z);
    result.trace.primal_residual.push_back((y2 - y1).norm());
  }
  result.y = 0.5 * (y1 + y2);
  return result;
}

std::pair<DenseMatrix, DenseMatrix> admm_one_step_closed_form(const DenseMatrix& f,
                                                              const SparseMatrix& l1,
                                                              const DenseMatrix& l2,
                                                              const FilterParams& params) {
  check_shapes(f, l1, l2);
  const double a = params.node_coefficient();
  const double b = params.feature_coefficient();
  const double a2 = 2.0 * params.p * params.lambda1 / ((1.0 + params.p) * (1.0 + params.p));
  DenseMatrix y1 = f - a * spmm(l1, f);
  const DenseMatrix left = f - a2 * spmm(l1, f);
  DenseMatrix y2 = left - b * (left * l2);
  return {std::move(y1), std::move(y2)};
}

DenseMatrix degenerate_filter(const DenseMatrix& f, const SparseMatrix& l1, double lambda1,
                              double lambda2) {
  require_dims(l1.rows() == f.rows() && l1.cols() == f.rows(), "degenerate_filter: L1 must be n x n");
  if (f.rows() > kMaxDenseOrder) throw DimensionError("degenerate_filter: exceeds dense limit");
  const Index n = f.rows();
  const DenseMatrix m = (1.0 + lambda2) * DenseMatrix::Identity(n, n) + lambda1 * l1.to_dense();
  return Cholesky(m).solve(f);
}

}  // namespace bigcn
