// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <vector>

#include "lrsdc/sylvester.hpp"

namespace lrsdc {

/// Per-step diagnostics of one mBUG step. basis_defect is the worst
/// containment residual ||W W^H M - M|| over the merged bases, which the
/// Galerkin argument needs to stay at roundoff level.
struct MbugStepReport {
  Index rank_before = 0;
  Index rank_merged = 0;  // columns of U_hat
  Index rank_after = 0;
  SolveStats k_solve;
  SolveStats l_solve;
  SolveStats s_solve;
  double basis_defect = 0.0;
};

struct MbugOptions {
  TallSolveOptions tall;
  SStepOptions s_step;
  double qr_cutoff = kQrRankCutoff;
  bool audit_bases = true;
};

namespace detail {

template <class S>
DenseMatrix<S> hcat(std::initializer_list<const DenseMatrix<S>*> blocks) {
  Index rows = 0;
  Index cols = 0;
  for (const auto* b : blocks) {
    rows = std::max(rows, b->rows());
    cols += b->cols();
  }
  DenseMatrix<S> out(rows, cols);
  Index at = 0;
  for (const auto* b : blocks) {
    out.middleCols(at, b->cols()) = *b;
    at += b->cols();
  }
  return out;
}

/// Orthonormal basis of the concatenated blocks; numerically dependent
/// columns are dropped by the pivoted-QR cutoff.
template <class S>
DenseMatrix<S> merge_basis(std::initializer_list<const DenseMatrix<S>*> blocks,
                           double cutoff) {
  return qr_column_pivoted<S>(hcat<S>(blocks), cutoff).Q;
}

template <class S>
double containment_defect(const DenseMatrix<S>& w, const DenseMatrix<S>& m) {
  if (m.cols() == 0) return 0.0;
  return (w * (w.adjoint() * m) - m).norm();
}

/// U_hat^H G V_hat through the factors of G.
template <class S>
DenseMatrix<S> project_factored(const Factorization<S>& g,
                                const DenseMatrix<S>& uhat,
                                const DenseMatrix<S>& vhat) {
  if (g.rank() == 0) {
    return DenseMatrix<S>::Zero(uhat.cols(), vhat.cols());
  }
  return (uhat.adjoint() * g.u()) *
         g.singular_values().template cast<S>().asDiagonal() *
         (g.v().adjoint() * vhat);
}

}  // namespace detail

/// One rank-adaptive mBUG step from t to t + dt: truncated right-hand-side
/// evaluation, K/L basis prediction, merge by pivoted QR, projected Galerkin
/// solve for the core, truncation at eps_s.
template <class S>
std::pair<Factorization<S>, MbugStepReport> mbug_step(
    const LinearMatrixODE<S>& ode, const Factorization<S>& x, Real t, Real dt,
    Real eps_f, Real eps_s, TruncationMode mode, const MbugOptions& opts = {}) {
  if (!(dt > 0.0)) {
    throw InvalidParameterError("mbug_step: dt must be positive");
  }
  if (eps_f < 0.0 || eps_s < 0.0) {
    throw InvalidParameterError("mbug_step: tolerances must be >= 0");
  }
  MbugStepReport report;
  report.rank_before = x.rank();

  // Truncated right-hand side at (X_n, t_n).
  Factorization<S> f = eval_lowrank(ode, x, t, eps_f, mode);

  TallSolveOptions tall = opts.tall;
  tall.eps_active = std::min(eps_f, eps_s);

  const Real t_next = t + dt;
  Factorization<S> g = ode.source_at(t_next);

  // K-step: K - dt sum_j A_j K C_j = U_n S_n + dt G(t_{n+1}) V_n.
  DenseMatrix<S> k_next;
  {
    DenseMatrix<S> rhs =
        x.u() * x.singular_values().template cast<S>().asDiagonal();
    if (g.rank() > 0) {
      rhs.noalias() += dt * (g.u() *
                             g.singular_values().template cast<S>().asDiagonal() *
                             (g.v().adjoint() * x.v()));
    }
    k_next = solve_tall_sylvester(ode, x.v(), dt, rhs, SylvesterSide::K,
                                  &report.k_solve, tall);
  }

  // L-step on the transposed problem.
  DenseMatrix<S> l_next;
  {
    DenseMatrix<S> rhs =
        x.v() * x.singular_values().template cast<S>().asDiagonal();
    if (g.rank() > 0) {
      rhs.noalias() += dt * (g.v() *
                             g.singular_values().template cast<S>().asDiagonal() *
                             (g.u().adjoint() * x.u()));
    }
    l_next = solve_tall_sylvester(ode, x.u(), dt, rhs, SylvesterSide::L,
                                  &report.l_solve, tall);
  }

  DenseMatrix<S> uhat =
      detail::merge_basis<S>({&x.u(), &f.u(), &k_next}, opts.qr_cutoff);
  DenseMatrix<S> vhat =
      detail::merge_basis<S>({&x.v(), &f.v(), &l_next}, opts.qr_cutoff);
  report.rank_merged = uhat.cols();
  if (opts.audit_bases) {
    report.basis_defect = std::max(detail::containment_defect(uhat, x.u()),
                                   detail::containment_defect(vhat, x.v()));
  }

  // Projected operators and Galerkin solve for the core.
  const Index s = ode.term_count();
  std::vector<DenseMatrix<S>> ahat(static_cast<size_t>(s));
  std::vector<DenseMatrix<S>> bhat(static_cast<size_t>(s));
  for (Index j = 0; j < s; ++j) {
    ahat[static_cast<size_t>(j)] = project(ode.term(j).first, uhat);
    bhat[static_cast<size_t>(j)] = project(ode.term(j).second, vhat);
  }
  DenseMatrix<S> core_rhs =
      (uhat.adjoint() * x.u()) *
          x.singular_values().template cast<S>().asDiagonal() *
          (x.v().adjoint() * vhat) +
      dt * detail::project_factored(g, uhat, vhat);
  DenseMatrix<S> s_hat = solve_s_step<S>(ahat, bhat, dt, core_rhs,
                                         &report.s_solve, opts.s_step);

  ThinSvd<S> svd = thin_svd(s_hat);
  Factorization<S> core(std::move(svd.U), std::move(svd.sigma),
                        std::move(svd.V));
  Factorization<S> trimmed = truncate(core, eps_s, mode);
  report.rank_after = trimmed.rank();

  return {Factorization<S>(uhat * trimmed.u(), trimmed.singular_values(),
                           vhat * trimmed.v()),
          report};
}

}  // namespace lrsdc
