// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <memory>
#include <utility>
#include <variant>
#include <vector>

#include "lrsdc/lowrank.hpp"

namespace lrsdc {

/// A linear map on column blocks with a fast apply. Identity, diagonal and
/// dense forms get dedicated paths; anything else is wrapped as a function.
template <class S>
class CoefficientOperator {
public:
  using ApplyFn = std::function<DenseMatrix<S>(const DenseMatrix<S>&)>;

  static CoefficientOperator identity(Index n) {
    return CoefficientOperator(n, ScaledIdentity{S(1)});
  }
  static CoefficientOperator scaled_identity(Index n, S c) {
    return CoefficientOperator(n, ScaledIdentity{c});
  }
  static CoefficientOperator diagonal(DenseVector<S> d) {
    const Index n = d.size();
    return CoefficientOperator(n, Diagonal{std::move(d)});
  }
  static CoefficientOperator dense(DenseMatrix<S> m) {
    if (m.rows() != m.cols()) {
      throw InvalidInputError("CoefficientOperator: dense form must be square");
    }
    const Index n = m.rows();
    return CoefficientOperator(n, std::make_shared<DenseMatrix<S>>(std::move(m)));
  }
  static CoefficientOperator from_apply(Index n, ApplyFn fn) {
    return CoefficientOperator(n, std::move(fn));
  }

  Index dim() const { return dim_; }

  DenseMatrix<S> apply(const DenseMatrix<S>& block) const {
    if (block.rows() != dim_) {
      throw InvalidInputError("CoefficientOperator: block row count mismatch");
    }
    if (const auto* id = std::get_if<ScaledIdentity>(&impl_)) {
      return id->c * block;
    }
    if (const auto* d = std::get_if<Diagonal>(&impl_)) {
      return d->entries.asDiagonal() * block;
    }
    if (const auto* m = std::get_if<DensePtr>(&impl_)) {
      return **m * block;
    }
    return std::get<ApplyFn>(impl_)(block);
  }

  bool has_dense() const { return !std::holds_alternative<ApplyFn>(impl_); }

  /// Materializes the map as a matrix; costs dim applications for
  /// function-backed operators.
  DenseMatrix<S> to_dense() const {
    if (const auto* id = std::get_if<ScaledIdentity>(&impl_)) {
      return id->c * DenseMatrix<S>::Identity(dim_, dim_);
    }
    if (const auto* d = std::get_if<Diagonal>(&impl_)) {
      return DenseMatrix<S>(d->entries.asDiagonal());
    }
    if (const auto* m = std::get_if<DensePtr>(&impl_)) {
      return **m;
    }
    return apply(DenseMatrix<S>::Identity(dim_, dim_));
  }

private:
  struct ScaledIdentity {
    S c;
  };
  struct Diagonal {
    DenseVector<S> entries;
  };
  using DensePtr = std::shared_ptr<DenseMatrix<S>>;
  using Impl = std::variant<ScaledIdentity, Diagonal, DensePtr, ApplyFn>;

  CoefficientOperator(Index n, Impl impl) : dim_(n), impl_(std::move(impl)) {}

  Index dim_;
  Impl impl_;
};

/// Right-hand side model F(X, t) = sum_j A_j X B_j^H + G(t). Over the real
/// field B^H is the paper-facing transpose; complex problems fold any needed
/// conjugation into the stored B factors (the benchmarks keep B real).
template <class S>
class LinearMatrixODE {
public:
  using Coefficient = CoefficientOperator<S>;
  using Source = std::function<Factorization<S>(Real)>;

  LinearMatrixODE(std::vector<std::pair<Coefficient, Coefficient>> terms,
                  Source source = {})
      : terms_(std::move(terms)), source_(std::move(source)) {
    if (terms_.empty()) {
      throw InvalidInputError("LinearMatrixODE: needs at least one term");
    }
    for (const auto& [a, b] : terms_) {
      if (a.dim() != terms_[0].first.dim() || b.dim() != terms_[0].second.dim()) {
        throw InvalidInputError("LinearMatrixODE: term dimensions disagree");
      }
    }
  }

  Index rows() const { return terms_[0].first.dim(); }
  Index cols() const { return terms_[0].second.dim(); }
  Index term_count() const { return static_cast<Index>(terms_.size()); }
  const std::pair<Coefficient, Coefficient>& term(Index j) const {
    return terms_[static_cast<size_t>(j)];
  }

  bool has_source() const { return static_cast<bool>(source_); }
  Factorization<S> source_at(Real t) const {
    if (!source_) {
      return Factorization<S>::zero(rows(), cols());
    }
    return source_(t);
  }

private:
  std::vector<std::pair<Coefficient, Coefficient>> terms_;
  Source source_;
};

/// Dense evaluation of F(X, t); reference integrators and oracles live on
/// this path.
template <class S>
DenseMatrix<S> apply_dense(const LinearMatrixODE<S>& ode,
                           const DenseMatrix<S>& x, Real t) {
  if (x.rows() != ode.rows() || x.cols() != ode.cols()) {
    throw InvalidInputError("apply_dense: state shape mismatch");
  }
  DenseMatrix<S> acc = DenseMatrix<S>::Zero(x.rows(), x.cols());
  for (Index j = 0; j < ode.term_count(); ++j) {
    const auto& [a, b] = ode.term(j);
    DenseMatrix<S> ax = a.apply(x);
    acc += b.apply(ax.adjoint()).adjoint();
  }
  if (ode.has_source()) {
    acc += ode.source_at(t).dense();
  }
  return acc;
}

/// Low-rank evaluation T^sum_eps(F(X, t)): one factored term A_j U, sigma,
/// B_j V per coefficient pair plus the source, rounded to tolerance eps.
template <class S>
Factorization<S> eval_lowrank(const LinearMatrixODE<S>& ode,
                              const Factorization<S>& x, Real t, Real eps,
                              TruncationMode mode) {
  if (x.rows() != ode.rows() || x.cols() != ode.cols()) {
    throw InvalidInputError("eval_lowrank: state shape mismatch");
  }
  std::vector<LowRankTerm<S>> terms;
  terms.reserve(static_cast<size_t>(ode.term_count()) + 1);
  if (x.rank() > 0) {
    for (Index j = 0; j < ode.term_count(); ++j) {
      const auto& [a, b] = ode.term(j);
      terms.push_back(LowRankTerm<S>{a.apply(x.u()), x.singular_values(),
                                     b.apply(x.v())});
    }
  }
  if (ode.has_source()) {
    Factorization<S> g = ode.source_at(t);
    if (g.rank() > 0) {
      terms.push_back(LowRankTerm<S>{g.u(), g.singular_values(), g.v()});
    }
  }
  if (terms.empty()) {
    return Factorization<S>::zero(ode.rows(), ode.cols());
  }
  return rounded_sum_terms<S>(terms, eps, mode);
}

/// Galerkin projection W^H * op(W) for an orthonormal-column W.
template <class S>
DenseMatrix<S> project(const CoefficientOperator<S>& op,
                       const DenseMatrix<S>& w) {
  if (w.rows() != op.dim()) {
    throw InvalidInputError("project: basis row count mismatch");
  }
  return w.adjoint() * op.apply(w);
}

}  // namespace lrsdc
