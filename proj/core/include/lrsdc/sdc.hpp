// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <utility>
#include <vector>

#include "lrsdc/mbug.hpp"

namespace lrsdc {

/// Legendre Gauss-Lobatto subdivision of one macro step. weights(m, s) is
/// the dimensionless interpolatory weight of node s for the integral over
/// [nodes(m), nodes(m+1)]; the rule times sub_steps(m) integrates
/// polynomials of degree <= P exactly.
struct SdcGrid {
  int subintervals = 0;   // P
  RealVector nodes;       // P + 1, strictly increasing, endpoints exact
  RealVector sub_steps;   // P, nodes(m+1) - nodes(m)
  RealMatrix weights;     // P x (P + 1)
};

/// Gauss-Lobatto nodes and interpolatory subinterval weights on [t0, t1].
SdcGrid lobatto_grid(int subintervals, Real t0, Real t1);

/// Gauss-Lobatto points on [-1, 1] (ascending) and Gauss-Legendre rule of
/// the given size; building blocks for lobatto_grid and its tests.
RealVector lobatto_points_unit(int subintervals);
std::pair<RealVector, RealVector> gauss_legendre(int points);

/// Level-indexed truncation tolerances derived from the macro step h and
/// the constant C:
///   eps_s = C h^2, eps_f = C h,
///   eps_f^(k) = C h^(k+1), eps_r^(k) = eps_s^(k+1) = C h^(k+2), k = 1..K.
class ToleranceSchedule {
public:
  ToleranceSchedule(Real c, Real h, int corrections)
      : c_(c), h_(h), corrections_(corrections) {
    if (!(c > 0.0) || !(h > 0.0) || corrections < 0) {
      throw InvalidParameterError("ToleranceSchedule: need C > 0, h > 0, K >= 0");
    }
  }

  Real constant() const { return c_; }
  Real step() const { return h_; }
  int corrections() const { return corrections_; }

  Real eps_f() const { return c_ * h_; }
  Real eps_s() const { return c_ * h_ * h_; }

  Real eps_f_level(int k) const {
    check_level(k);
    return c_ * std::pow(h_, k + 1);
  }
  Real eps_r_level(int k) const {
    check_level(k);
    return c_ * std::pow(h_, k + 2);
  }
  /// eps_s^(j) for level j = 2..K+1 (equals eps_r^(j-1)).
  Real eps_s_level(int j) const {
    check_level(j - 1);
    return c_ * std::pow(h_, j + 1);
  }
  /// Tolerance of the last truncation the step performs.
  Real final_eps_s() const {
    return corrections_ == 0 ? eps_s() : eps_s_level(corrections_ + 1);
  }

private:
  void check_level(int k) const {
    if (k < 1 || k > corrections_) {
      throw InvalidParameterError("ToleranceSchedule: level out of range");
    }
  }
  Real c_;
  Real h_;
  int corrections_;
};

/// Dense spectral deferred correction step with an implicit Euler base
/// scheme; every implicit solve is a direct vectorized solve. Oracle-sized
/// problems only.
template <class S>
DenseMatrix<S> sdc_dense_step(const LinearMatrixODE<S>& ode,
                              const DenseMatrix<S>& x, const SdcGrid& grid,
                              int corrections) {
  const Index m1 = ode.rows();
  const Index m2 = ode.cols();
  if (x.rows() != m1 || x.cols() != m2) {
    throw InvalidInputError("sdc_dense_step: state shape mismatch");
  }
  if (m1 * m2 > 10000) {
    throw InvalidParameterError("sdc_dense_step: oracle limited to m1*m2 <= 1e4");
  }
  const int P = grid.subintervals;
  const Index n = m1 * m2;

  // I - dt * sum_j conj(B_j) kron A_j, factored once per subinterval.
  std::vector<DenseMatrix<S>> adense;
  std::vector<DenseMatrix<S>> bdense;
  for (Index j = 0; j < ode.term_count(); ++j) {
    adense.push_back(ode.term(j).first.to_dense());
    bdense.push_back(ode.term(j).second.to_dense());
  }
  std::vector<Eigen::PartialPivLU<DenseMatrix<S>>> lus;
  lus.reserve(static_cast<size_t>(P));
  for (int m = 0; m < P; ++m) {
    const Real dt = grid.sub_steps[m];
    DenseMatrix<S> big = DenseMatrix<S>::Identity(n, n);
    for (size_t j = 0; j < adense.size(); ++j) {
      DenseMatrix<S> bc = bdense[j].conjugate();
      for (Index bi = 0; bi < m2; ++bi) {
        for (Index bj = 0; bj < m2; ++bj) {
          big.block(bi * m1, bj * m1, m1, m1) -= (dt * bc(bi, bj)) * adense[j];
        }
      }
    }
    lus.emplace_back(big);
    if (!(lus.back().rcond() > kSingularRcond)) {
      throw SolverFailureError("sdc_dense_step: implicit system singular",
                               lus.back().rcond());
    }
  }

  const auto linear_part = [&](const DenseMatrix<S>& z) {
    DenseMatrix<S> acc = DenseMatrix<S>::Zero(m1, m2);
    for (size_t j = 0; j < adense.size(); ++j) {
      acc.noalias() += adense[j] * z * bdense[j].adjoint();
    }
    return acc;
  };
  const auto implicit_solve = [&](int m, const DenseMatrix<S>& rhs) {
    DenseMatrix<S> rv = rhs.reshaped(n, 1);
    DenseMatrix<S> xv = lus[static_cast<size_t>(m)].solve(rv);
    return DenseMatrix<S>(xv.reshaped(m1, m2));
  };

  // Stage 1: implicit Euler sweep.
  std::vector<DenseMatrix<S>> level(static_cast<size_t>(P) + 1);
  level[0] = x;
  for (int m = 0; m < P; ++m) {
    const Real dt = grid.sub_steps[m];
    DenseMatrix<S> rhs = level[static_cast<size_t>(m)];
    if (ode.has_source()) {
      rhs += dt * ode.source_at(grid.nodes[m + 1]).dense();
    }
    level[static_cast<size_t>(m) + 1] = implicit_solve(m, rhs);
  }

  // Stage 2: corrections against the Picard integral.
  for (int k = 1; k <= corrections; ++k) {
    std::vector<DenseMatrix<S>> fvals(static_cast<size_t>(P) + 1);
    for (int m = 0; m <= P; ++m) {
      fvals[static_cast<size_t>(m)] =
          apply_dense(ode, level[static_cast<size_t>(m)], grid.nodes[m]);
    }
    std::vector<DenseMatrix<S>> next(static_cast<size_t>(P) + 1);
    next[0] = x;
    for (int m = 0; m < P; ++m) {
      const Real dt = grid.sub_steps[m];
      DenseMatrix<S> quad = DenseMatrix<S>::Zero(m1, m2);
      for (int s = 0; s <= P; ++s) {
        quad += (dt * grid.weights(m, s)) * fvals[static_cast<size_t>(s)];
      }
      // The source at t_{m+1} cancels between the two F terms of the
      // correction equation; only the linear part enters the explicit side.
      DenseMatrix<S> rhs = next[static_cast<size_t>(m)] -
                           dt * linear_part(level[static_cast<size_t>(m) + 1]) +
                           quad;
      next[static_cast<size_t>(m) + 1] = implicit_solve(m, rhs);
    }
    level = std::move(next);
  }
  return level[static_cast<size_t>(P)];
}

/// Worst-case audit over the linear solves of a run.
struct SolveAudit {
  long solves = 0;
  double worst_ratio = 0.0;  // max residual / tolerance
  bool ok() const { return worst_ratio <= 1.0; }
  void absorb(const SolveStats& s) {
    ++solves;
    if (s.tolerance > 0.0) {
      worst_ratio = std::max(worst_ratio, s.residual / s.tolerance);
    }
  }
  void absorb(const SolveAudit& other) {
    solves += other.solves;
    worst_ratio = std::max(worst_ratio, other.worst_ratio);
  }
};

/// Diagnostics of one SDC-mBUG macro step.
struct SdcMbugDiagnostics {
  std::vector<MbugStepReport> stage1;
  // One entry per (level k, subinterval m), k-major.
  std::vector<Index> correction_rank;
  std::vector<Index> correction_merged_rank;
  double basis_defect = 0.0;  // worst containment residual, both stages
  SolveAudit audit;
};

/// One SDC-mBUG macro step from t to t + h (Stage 1: mBUG sweep at
/// (eps_f, eps_s); Stage 2: K correction levels without K/L solves, with the
/// level-dependent tolerance schedule).
template <class S>
std::pair<Factorization<S>, SdcMbugDiagnostics> sdc_mbug_step(
    const LinearMatrixODE<S>& ode, const Factorization<S>& x, Real t, Real h,
    int corrections, int subintervals, const ToleranceSchedule& sched,
    TruncationMode mode, const MbugOptions& opts = {}) {
  if (subintervals < 1) {
    throw InvalidParameterError("sdc_mbug_step: need P >= 1");
  }
  const SdcGrid grid = lobatto_grid(subintervals, t, t + h);
  const int P = subintervals;
  const int K = corrections;
  SdcMbugDiagnostics diag;

  // Stage 1: chained mBUG steps across the subintervals.
  std::vector<Factorization<S>> level;
  level.reserve(static_cast<size_t>(P) + 1);
  level.push_back(x);
  for (int m = 0; m < P; ++m) {
    auto [next, report] =
        mbug_step(ode, level.back(), grid.nodes[m], grid.sub_steps[m],
                  sched.eps_f(), sched.eps_s(), mode, opts);
    diag.audit.absorb(report.k_solve);
    diag.audit.absorb(report.l_solve);
    diag.audit.absorb(report.s_solve);
    diag.basis_defect = std::max(diag.basis_defect, report.basis_defect);
    diag.stage1.push_back(std::move(report));
    level.push_back(std::move(next));
  }

  // Stage 2: successive corrections, Galerkin-only.
  for (int k = 1; k <= K; ++k) {
    const Real eps_fk = sched.eps_f_level(k);
    const Real eps_rk = sched.eps_r_level(k);
    const Real eps_sk1 = sched.eps_s_level(k + 1);

    // C-1: truncated right-hand-side factors at every node of level k.
    std::vector<Factorization<S>> f;
    f.reserve(static_cast<size_t>(P) + 1);
    for (int m = 0; m <= P; ++m) {
      f.push_back(eval_lowrank(ode, level[static_cast<size_t>(m)],
                               grid.nodes[m], eps_fk, mode));
    }

    // C-2: per subinterval, the rounded combination
    //   -dt_m F_{m+1} + dt_m sum_s w_{m,s} F_s.
    std::vector<Factorization<S>> r;
    r.reserve(static_cast<size_t>(P));
    for (int m = 0; m < P; ++m) {
      const Real dt = grid.sub_steps[m];
      std::vector<LowRankTerm<S>> terms;
      terms.reserve(static_cast<size_t>(P) + 2);
      const auto push_scaled = [&terms](const Factorization<S>& g, Real c) {
        if (g.rank() == 0 || c == 0.0) return;
        const Real mag = std::abs(c);
        const Real sgn = c < 0 ? -1.0 : 1.0;
        terms.push_back(LowRankTerm<S>{g.u() * S(sgn),
                                       (g.singular_values() * mag).eval(),
                                       g.v()});
      };
      push_scaled(f[static_cast<size_t>(m) + 1], -dt);
      for (int s = 0; s <= P; ++s) {
        push_scaled(f[static_cast<size_t>(s)], dt * grid.weights(m, s));
      }
      if (terms.empty()) {
        r.push_back(Factorization<S>::zero(ode.rows(), ode.cols()));
      } else {
        r.push_back(rounded_sum_terms<S>(terms, eps_rk, mode));
      }
    }

    // C-3..C-5 sweep.
    std::vector<Factorization<S>> next;
    next.reserve(static_cast<size_t>(P) + 1);
    next.push_back(x);
    for (int m = 0; m < P; ++m) {
      const Real dt = grid.sub_steps[m];
      const Factorization<S>& prev = next.back();
      const Factorization<S>& fm1 = f[static_cast<size_t>(m) + 1];
      const Factorization<S>& rm = r[static_cast<size_t>(m)];

      DenseMatrix<S> uhat = detail::merge_basis<S>(
          {&prev.u(), &fm1.u(), &rm.u()}, opts.qr_cutoff);
      DenseMatrix<S> vhat = detail::merge_basis<S>(
          {&prev.v(), &fm1.v(), &rm.v()}, opts.qr_cutoff);
      diag.correction_merged_rank.push_back(uhat.cols());
      if (opts.audit_bases) {
        const double defect =
            std::max({detail::containment_defect(uhat, prev.u()),
                      detail::containment_defect(vhat, prev.v()),
                      detail::containment_defect(uhat, rm.u()),
                      detail::containment_defect(vhat, rm.v())});
        diag.basis_defect = std::max(diag.basis_defect, defect);
      }

      const Index s = ode.term_count();
      std::vector<DenseMatrix<S>> ahat(static_cast<size_t>(s));
      std::vector<DenseMatrix<S>> bhat(static_cast<size_t>(s));
      for (Index j = 0; j < s; ++j) {
        ahat[static_cast<size_t>(j)] = project(ode.term(j).first, uhat);
        bhat[static_cast<size_t>(j)] = project(ode.term(j).second, vhat);
      }

      // S-equation rhs: projected previous state, projected correction term,
      // and the implicit source contribution dt * U^H G(t_{m+1}) V.
      DenseMatrix<S> core_rhs =
          detail::project_factored(prev, uhat, vhat) +
          detail::project_factored(rm, uhat, vhat);
      if (ode.has_source()) {
        Factorization<S> g = ode.source_at(grid.nodes[m + 1]);
        core_rhs.noalias() += dt * detail::project_factored(g, uhat, vhat);
      }

      SolveStats s_stats;
      DenseMatrix<S> s_hat =
          solve_s_step<S>(ahat, bhat, dt, core_rhs, &s_stats, opts.s_step);
      diag.audit.absorb(s_stats);

      ThinSvd<S> svd = thin_svd(s_hat);
      Factorization<S> core(std::move(svd.U), std::move(svd.sigma),
                            std::move(svd.V));
      Factorization<S> trimmed = truncate(core, eps_sk1, mode);
      diag.correction_rank.push_back(trimmed.rank());
      next.push_back(Factorization<S>(uhat * trimmed.u(),
                                      trimmed.singular_values(),
                                      vhat * trimmed.v()));
    }
    level = std::move(next);
  }

  return {level[static_cast<size_t>(P)], std::move(diag)};
}

/// Time series produced by the macro-step loop: rank after every step, a
/// strided set of state snapshots, and the final state.
template <class S>
struct Trajectory {
  RealVector times;           // steps + 1 entries, includes t0
  std::vector<Index> ranks;   // rank at each time entry
  std::vector<std::pair<Real, Factorization<S>>> snapshots;
  Factorization<S> final_state = Factorization<S>::zero(0, 0);
  SolveAudit audit;
  double basis_defect = 0.0;
};

struct IntegrateOptions {
  MbugOptions inner;
  int snapshot_stride = 0;      // 0: keep only the final state
  bool truncate_initial = true; // apply T_eps at the final-level tolerance to X0
};

/// Repeats sdc_mbug_step with K = P = order - 1 over `steps` macro steps of
/// size (t1 - t0) / steps, recording the rank after every step.
template <class S>
Trajectory<S> integrate(const LinearMatrixODE<S>& ode,
                        const Factorization<S>& x0, Real t0, Real t1,
                        long steps, int order, TruncationMode mode, Real c,
                        const IntegrateOptions& opts = {}) {
  if (steps < 1) {
    throw InvalidParameterError("integrate: need steps >= 1");
  }
  if (order < 2 || order > 4) {
    throw InvalidParameterError("integrate: order must be 2, 3 or 4");
  }
  const int kp = order - 1;
  const Real h = (t1 - t0) / static_cast<Real>(steps);
  const ToleranceSchedule sched(c, h, kp);

  Trajectory<S> traj;
  traj.times.resize(steps + 1);
  traj.ranks.reserve(static_cast<size_t>(steps) + 1);

  Factorization<S> x = opts.truncate_initial
                           ? truncate(x0, sched.final_eps_s(), mode)
                           : x0;
  traj.times[0] = t0;
  traj.ranks.push_back(x.rank());
  if (opts.snapshot_stride > 0) {
    traj.snapshots.emplace_back(t0, x);
  }

  for (long n = 0; n < steps; ++n) {
    const Real t = t0 + h * static_cast<Real>(n);
    auto [next, diag] = sdc_mbug_step(ode, x, t, h, kp, kp, sched, mode,
                                      opts.inner);
    x = std::move(next);
    traj.times[n + 1] = t0 + h * static_cast<Real>(n + 1);
    traj.ranks.push_back(x.rank());
    traj.audit.absorb(diag.audit);
    traj.basis_defect = std::max(traj.basis_defect, diag.basis_defect);
    if (opts.snapshot_stride > 0 && ((n + 1) % opts.snapshot_stride == 0)) {
      traj.snapshots.emplace_back(traj.times[n + 1], x);
    }
  }
  traj.final_state = std::move(x);
  return traj;
}

}  // namespace lrsdc
