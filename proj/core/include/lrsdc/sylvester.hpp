// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "lrsdc/operators.hpp"

namespace lrsdc {

/// Outcome of one linear solve: relative residual against the tolerance the
/// solve was asked to meet. residual <= tolerance on success.
struct SolveStats {
  double residual = 0.0;   // ||rhs - op(x)|| / ||rhs||
  double tolerance = 0.0;
  int iterations = 0;
  bool fallback = false;
};

namespace detail {

template <class S>
Real frob_norm(const DenseMatrix<S>& m) {
  return m.norm();
}

template <class S>
S frob_dot(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
  // Conjugates the first argument; real for a == b.
  return (a.array().conjugate() * b.array()).sum();
}

/// Restarted GMRES on matrices as vectors under the Frobenius inner product.
/// Returns the best iterate; `converged` reports whether the target was met.
template <class S>
struct GmresOutcome {
  DenseMatrix<S> x;
  double residual = 0.0;  // relative to ||rhs||
  int iterations = 0;
  bool converged = false;
  bool stagnated = false;
};

template <class S, class Apply>
GmresOutcome<S> gmres(Apply&& apply, const DenseMatrix<S>& rhs,
                      double tol_rel, int restart, int max_iterations) {
  GmresOutcome<S> out;
  const double bnorm = frob_norm(rhs);
  out.x = DenseMatrix<S>::Zero(rhs.rows(), rhs.cols());
  if (bnorm == 0.0) {
    out.converged = true;
    return out;
  }

  int total = 0;
  double prev_cycle_res = std::numeric_limits<double>::max();
  while (total < max_iterations) {
    DenseMatrix<S> r = rhs - apply(out.x);
    double beta = frob_norm(r);
    out.residual = beta / bnorm;
    if (out.residual <= tol_rel) {
      out.converged = true;
      return out;
    }
    if (out.residual > 0.9 * prev_cycle_res && total > 0) {
      out.stagnated = true;
      return out;
    }
    prev_cycle_res = out.residual;

    const int m = std::min(restart, max_iterations - total);
    std::vector<DenseMatrix<S>> basis;
    basis.reserve(static_cast<size_t>(m) + 1);
    basis.push_back(r / S(beta));

    Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic> h =
        Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>::Zero(m + 1, m);
    std::vector<S> cs(static_cast<size_t>(m));
    std::vector<S> sn(static_cast<size_t>(m));
    DenseVector<S> g = DenseVector<S>::Zero(m + 1);
    g[0] = S(beta);

    int k = 0;
    for (; k < m; ++k) {
      DenseMatrix<S> w = apply(basis[static_cast<size_t>(k)]);
      for (int i = 0; i <= k; ++i) {
        h(i, k) = frob_dot(basis[static_cast<size_t>(i)], w);
        w -= h(i, k) * basis[static_cast<size_t>(i)];
      }
      const double wnorm = frob_norm(w);
      h(k + 1, k) = S(wnorm);

      // Apply the accumulated Givens rotations, then create a new one.
      using Eigen::numext::abs2;
      using Eigen::numext::conj;
      for (int i = 0; i < k; ++i) {
        const S tmp = conj(cs[static_cast<size_t>(i)]) * h(i, k) +
                      conj(sn[static_cast<size_t>(i)]) * h(i + 1, k);
        h(i + 1, k) = -sn[static_cast<size_t>(i)] * h(i, k) +
                      cs[static_cast<size_t>(i)] * h(i + 1, k);
        h(i, k) = tmp;
      }
      const double denom = std::sqrt(abs2(h(k, k)) + abs2(h(k + 1, k)));
      if (denom == 0.0) {
        ++total;
        break;
      }
      cs[static_cast<size_t>(k)] = h(k, k) / S(denom);
      sn[static_cast<size_t>(k)] = h(k + 1, k) / S(denom);
      h(k, k) = S(denom);
      h(k + 1, k) = S(0);
      g[k + 1] = -sn[static_cast<size_t>(k)] * g[k];
      g[k] = conj(cs[static_cast<size_t>(k)]) * g[k];
      ++total;

      const double res = std::abs(g[k + 1]) / bnorm;
      if (res <= tol_rel || wnorm == 0.0 || total >= max_iterations) {
        ++k;
        break;
      }
      basis.push_back(w / S(wnorm));
    }

    if (k > 0) {
      DenseVector<S> y = h.topLeftCorner(k, k)
                             .template triangularView<Eigen::Upper>()
                             .solve(g.head(k));
      for (int i = 0; i < k; ++i) {
        out.x += y[i] * basis[static_cast<size_t>(i)];
      }
    }
    out.iterations = total;
  }

  DenseMatrix<S> final_residual = rhs - apply(out.x);
  out.residual = frob_norm(final_residual) / bnorm;
  out.converged = out.residual <= tol_rel;
  return out;
}

}  // namespace detail

struct SStepOptions {
  Index rank_cap = 256;          // refuse r_hat beyond this
  Index dense_vec_cap = 1024;    // direct Kronecker solve while p*q <= cap
  double tol = 1e-10;            // relative residual contract
  int max_iterations = 500;
  int restart = 60;
};

/// Solves the projected Galerkin equation S = dt * sum_j Ahat_j S Bhat_j^H
/// + rhs for the small core S. Direct Kronecker solve while the vectorized
/// dimension stays small, matrix-free GMRES above that (the r_hat^6 cost of
/// the dense route is prohibitive at merged benchmark ranks).
template <class S>
DenseMatrix<S> solve_s_step(std::span<const DenseMatrix<S>> ahat,
                            std::span<const DenseMatrix<S>> bhat, Real dt,
                            const DenseMatrix<S>& rhs,
                            SolveStats* stats = nullptr,
                            const SStepOptions& opts = {}) {
  if (ahat.size() != bhat.size() || ahat.empty()) {
    throw InvalidInputError("solve_s_step: operator lists disagree");
  }
  const Index p = rhs.rows();
  const Index q = rhs.cols();
  for (size_t j = 0; j < ahat.size(); ++j) {
    if (ahat[j].rows() != p || ahat[j].cols() != p || bhat[j].rows() != q ||
        bhat[j].cols() != q) {
      throw InvalidInputError("solve_s_step: projected operator shape mismatch");
    }
  }
  if (std::max(p, q) > opts.rank_cap) {
    throw CapacityError(
        "solve_s_step: merged rank exceeds cap; a larger truncation tolerance "
        "keeps the projected system small");
  }
  if (stats) {
    *stats = SolveStats{0.0, opts.tol, 0, false};
  }
  if (dt == 0.0 || p == 0 || q == 0) {
    return rhs;
  }

  const auto apply = [&](const DenseMatrix<S>& s) {
    DenseMatrix<S> y = s;
    for (size_t j = 0; j < ahat.size(); ++j) {
      y.noalias() -= dt * (ahat[j] * s * bhat[j].adjoint());
    }
    return y;
  };

  DenseMatrix<S> x;
  if (p * q <= opts.dense_vec_cap) {
    // vec(A S B^H) = (conj(B) kron A) vec(S)
    const Index n = p * q;
    DenseMatrix<S> big = DenseMatrix<S>::Identity(n, n);
    for (size_t j = 0; j < ahat.size(); ++j) {
      DenseMatrix<S> bc = bhat[j].conjugate();
      for (Index bi = 0; bi < q; ++bi) {
        for (Index bj = 0; bj < q; ++bj) {
          big.block(bi * p, bj * p, p, p) -= (dt * bc(bi, bj)) * ahat[j];
        }
      }
    }
    DenseMatrix<S> rhs_vec = rhs.reshaped(n, 1);
    DenseMatrix<S> x_vec;
    try {
      x_vec = solve_dense(big, rhs_vec);
    } catch (const SolverFailureError& e) {
      throw SingularSystemError("solve_s_step: dense solve failed", e.residual());
    }
    x = x_vec.reshaped(p, q);
  } else {
    auto res = detail::gmres<S>(apply, rhs, opts.tol, opts.restart,
                                opts.max_iterations);
    if (!res.converged) {
      throw SolverFailureError("solve_s_step: GMRES did not converge",
                               res.residual);
    }
    x = std::move(res.x);
  }

  const double bnorm = rhs.norm();
  const double rel = bnorm > 0 ? (rhs - apply(x)).norm() / bnorm : 0.0;
  if (stats) {
    stats->residual = rel;
  }
  if (rel > opts.tol) {
    throw SolverFailureError("solve_s_step: residual contract missed", rel);
  }
  return x;
}

enum class SylvesterSide { K, L };

struct TallSolveOptions {
  double eps_active = 0.0;  // smallest live truncation tolerance
  double tol_floor = 1e-12;
  int max_iterations = 500;
  int restart = 60;
};

/// Matrix-free solve of the K-step (side K, basis = V) or L-step (side L,
/// basis = U) generalized Sylvester equation
///   K - dt * sum_j A_j K C_j = rhs,   C_j = (V^H B_j V)^H,
/// with the L side realized as the K side on the transposed problem. The
/// relative tolerance defaults to 1e-2 * eps_active / ||rhs||, floored at
/// 1e-12. The rhs must already include the source projection. Falls back to
/// fixed-point iteration if GMRES stagnates.
template <class S>
DenseMatrix<S> solve_tall_sylvester(const LinearMatrixODE<S>& ode,
                                    const DenseMatrix<S>& basis, Real dt,
                                    const DenseMatrix<S>& rhs,
                                    SylvesterSide side,
                                    SolveStats* stats = nullptr,
                                    const TallSolveOptions& opts = {}) {
  const Index r = basis.cols();
  const Index tall_dim = side == SylvesterSide::K ? ode.rows() : ode.cols();
  const Index basis_dim = side == SylvesterSide::K ? ode.cols() : ode.rows();
  if (basis.rows() != basis_dim || rhs.rows() != tall_dim || rhs.cols() != r) {
    throw InvalidInputError("solve_tall_sylvester: shape mismatch");
  }

  const double bnorm = rhs.norm();
  double tol_rel = opts.tol_floor;
  if (opts.eps_active > 0.0 && bnorm > 0.0) {
    tol_rel = std::max(opts.tol_floor, 1e-2 * opts.eps_active / bnorm);
  }
  if (stats) {
    *stats = SolveStats{0.0, tol_rel, 0, false};
  }
  if (dt == 0.0 || r == 0 || bnorm == 0.0) {
    return rhs;
  }

  // Projected right factors, r x r each.
  const Index s = ode.term_count();
  std::vector<DenseMatrix<S>> c(static_cast<size_t>(s));
  for (Index j = 0; j < s; ++j) {
    const auto& term = ode.term(j);
    const auto& right_op = side == SylvesterSide::K ? term.second : term.first;
    DenseMatrix<S> rb = right_op.apply(basis);
    c[static_cast<size_t>(j)] = rb.adjoint() * basis;  // (basis^H op basis)^H
  }

  const auto apply = [&](const DenseMatrix<S>& k) {
    DenseMatrix<S> y = k;
    for (Index j = 0; j < s; ++j) {
      const auto& term = ode.term(j);
      const auto& left_op = side == SylvesterSide::K ? term.first : term.second;
      y.noalias() -= dt * (left_op.apply(k) * c[static_cast<size_t>(j)]);
    }
    return y;
  };

  auto res = detail::gmres<S>(apply, rhs, tol_rel, opts.restart,
                              opts.max_iterations);
  int iterations = res.iterations;
  bool fallback = false;
  if (!res.converged) {
    // Identity-shift fixed point: K <- rhs + dt * sum_j A_j K C_j.
    fallback = true;
    DenseMatrix<S> x = std::move(res.x);
    double best = res.residual;
    DenseMatrix<S> best_x = x;
    for (int i = 0; i < opts.max_iterations; ++i) {
      x = rhs + (x - apply(x));
      const double rel = (rhs - apply(x)).norm() / bnorm;
      ++iterations;
      if (rel < best) {
        best = rel;
        best_x = x;
      }
      if (rel <= tol_rel) break;
      if (rel > 10.0 * best) break;  // diverging
    }
    res.x = std::move(best_x);
    res.residual = best;
    res.converged = best <= tol_rel;
  }

  if (stats) {
    stats->residual = res.residual;
    stats->iterations = iterations;
    stats->fallback = fallback;
  }
  if (!res.converged) {
    throw SolverFailureError("solve_tall_sylvester: no convergence",
                             res.residual);
  }
  return res.x;
}

}  // namespace lrsdc
