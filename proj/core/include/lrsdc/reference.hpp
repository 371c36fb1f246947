// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "lrsdc/sdc.hpp"

namespace lrsdc {

/// Dense full-rank states sampled along a reference trajectory.
template <class S>
struct ReferenceSolution {
  RealVector times;
  std::vector<DenseMatrix<S>> states;
  long steps = 0;  // step count of the producing integrator
};

/// Classical fourth-order Runge-Kutta on dX/dt = F(X, t), sampling at the
/// requested instants. Sample times must land on the step grid.
template <class S>
ReferenceSolution<S> rk4_dense(const LinearMatrixODE<S>& ode,
                               const DenseMatrix<S>& x0, Real t0, Real t1,
                               long steps, const RealVector& sample_at) {
  if (steps < 1) {
    throw InvalidParameterError("rk4_dense: need steps >= 1");
  }
  const Real h = (t1 - t0) / static_cast<Real>(steps);

  std::vector<long> sample_index(static_cast<size_t>(sample_at.size()));
  for (Index i = 0; i < sample_at.size(); ++i) {
    const Real pos = (sample_at[i] - t0) / h;
    const long n = std::lround(pos);
    if (n < 0 || n > steps || std::abs(pos - static_cast<Real>(n)) > 1e-8) {
      throw InvalidParameterError("rk4_dense: sample time off the step grid");
    }
    if (i > 0 && sample_at[i] <= sample_at[i - 1]) {
      throw InvalidParameterError("rk4_dense: sample times must increase");
    }
    sample_index[static_cast<size_t>(i)] = n;
  }

  ReferenceSolution<S> out;
  out.times = sample_at;
  out.states.reserve(static_cast<size_t>(sample_at.size()));
  out.steps = steps;

  DenseMatrix<S> x = x0;
  size_t next_sample = 0;
  const auto maybe_sample = [&](long n) {
    while (next_sample < sample_index.size() &&
           sample_index[next_sample] == n) {
      out.states.push_back(x);
      ++next_sample;
    }
  };
  maybe_sample(0);
  for (long n = 0; n < steps; ++n) {
    const Real t = t0 + h * static_cast<Real>(n);
    DenseMatrix<S> k1 = apply_dense(ode, x, t);
    DenseMatrix<S> k2 = apply_dense(ode, (x + (h / 2) * k1).eval(), t + h / 2);
    DenseMatrix<S> k3 = apply_dense(ode, (x + (h / 2) * k2).eval(), t + h / 2);
    DenseMatrix<S> k4 = apply_dense(ode, (x + h * k3).eval(), t + h);
    x += (h / 6) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    maybe_sample(n + 1);
  }
  return out;
}

/// One dense implicit Euler step: (I - dt sum_j conj(B_j) kron A_j) vec(X')
/// = vec(X + dt G(t + dt)), solved directly. Oracle-sized problems only.
template <class S>
DenseMatrix<S> implicit_euler_dense(const LinearMatrixODE<S>& ode,
                                    const DenseMatrix<S>& x, Real t, Real dt) {
  const Index m1 = ode.rows();
  const Index m2 = ode.cols();
  if (x.rows() != m1 || x.cols() != m2) {
    throw InvalidInputError("implicit_euler_dense: state shape mismatch");
  }
  if (dt == 0.0) {
    return x;
  }
  const Index n = m1 * m2;
  DenseMatrix<S> big = DenseMatrix<S>::Identity(n, n);
  for (Index j = 0; j < ode.term_count(); ++j) {
    DenseMatrix<S> a = ode.term(j).first.to_dense();
    DenseMatrix<S> bc = ode.term(j).second.to_dense().conjugate();
    for (Index bi = 0; bi < m2; ++bi) {
      for (Index bj = 0; bj < m2; ++bj) {
        big.block(bi * m1, bj * m1, m1, m1) -= (dt * bc(bi, bj)) * a;
      }
    }
  }
  DenseMatrix<S> rhs = x;
  if (ode.has_source()) {
    rhs += dt * ode.source_at(t + dt).dense();
  }
  DenseMatrix<S> xv = solve_dense(big, DenseMatrix<S>(rhs.reshaped(n, 1)));
  return xv.reshaped(m1, m2);
}

/// Numerical rank of each sampled state after truncation at eps: the count
/// of singular values above the selected threshold (hard and soft drop the
/// same set).
template <class S>
std::vector<std::pair<Real, Index>> reference_rank_curve(
    const ReferenceSolution<S>& ref, Real eps, TruncationMode mode) {
  std::vector<std::pair<Real, Index>> curve;
  curve.reserve(ref.states.size());
  for (size_t i = 0; i < ref.states.size(); ++i) {
    const ThinSvd<S> svd = thin_svd(ref.states[i]);
    const Real alpha = select_threshold(svd.sigma, eps, mode);
    Index r = 0;
    while (r < svd.sigma.size() && svd.sigma[r] > alpha) ++r;
    curve.emplace_back(ref.times[static_cast<Index>(i)], r);
  }
  return curve;
}

/// Binary cache for expensive references: magic "LRSDCREF", version u32,
/// field tag u8 (0 real / 1 complex), m1 u64, m2 u64, sample count u64,
/// times f64[], states contiguous f64 (re/im interleaved when complex),
/// little-endian throughout.
void save_reference(const std::string& path, const ReferenceSolution<Real>& ref);
void save_reference(const std::string& path, const ReferenceSolution<Complex>& ref);
bool load_reference(const std::string& path, ReferenceSolution<Real>* out);
bool load_reference(const std::string& path, ReferenceSolution<Complex>* out);

}  // namespace lrsdc
