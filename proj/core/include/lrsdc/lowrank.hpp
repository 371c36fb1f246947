// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cmath>
#include <span>
#include <utility>
#include <vector>

#include "lrsdc/dense.hpp"
#include "lrsdc/errors.hpp"
#include "lrsdc/scalar.hpp"

namespace lrsdc {

enum class TruncationMode { Hard, Soft };

inline const char* to_string(TruncationMode mode) {
  return mode == TruncationMode::Hard ? "hard" : "soft";
}

/// SVD-form low-rank matrix U * diag(sigma) * V^H with orthonormal factors
/// and nonincreasing nonnegative singular values. Rank-0 values keep their
/// shape through empty factors.
template <class S>
class Factorization {
public:
  Factorization(DenseMatrix<S> u, RealVector sigma, DenseMatrix<S> v)
      : u_(std::move(u)), sigma_(std::move(sigma)), v_(std::move(v)) {
    if (u_.cols() != sigma_.size() || v_.cols() != sigma_.size()) {
      throw InvalidInputError("Factorization: factor column counts disagree");
    }
    if (sigma_.size() > std::min(u_.rows(), v_.rows())) {
      throw InvalidInputError("Factorization: rank exceeds min dimension");
    }
    for (Index i = 0; i < sigma_.size(); ++i) {
      if (!(sigma_[i] >= 0.0) || !std::isfinite(sigma_[i])) {
        throw InvalidInputError("Factorization: singular values must be finite and >= 0");
      }
      if (i > 0 && sigma_[i] > sigma_[i - 1]) {
        throw InvalidInputError("Factorization: singular values must be nonincreasing");
      }
    }
  }

  static Factorization zero(Index rows, Index cols) {
    return Factorization(DenseMatrix<S>(rows, 0), RealVector(0),
                         DenseMatrix<S>(cols, 0));
  }

  /// Rank-1 value from unnormalized column/row profiles.
  static Factorization rank_one(const DenseVector<S>& u, const DenseVector<S>& v) {
    const double nu = u.norm();
    const double nv = v.norm();
    if (nu == 0.0 || nv == 0.0) {
      return zero(u.size(), v.size());
    }
    DenseMatrix<S> uu = u / S(nu);
    DenseMatrix<S> vv = v / S(nv);
    RealVector s(1);
    s[0] = nu * nv;
    return Factorization(std::move(uu), std::move(s), std::move(vv));
  }

  /// Thin SVD of a dense matrix, discarding singular values at or below
  /// rel_cutoff * sigma_max (exact zeros always go).
  static Factorization from_dense(const DenseMatrix<S>& m, double rel_cutoff = 0.0) {
    ThinSvd<S> svd = thin_svd(m);
    const double lead = svd.sigma.size() > 0 ? svd.sigma[0] : 0.0;
    Index r = 0;
    while (r < svd.sigma.size() && svd.sigma[r] > rel_cutoff * lead &&
           svd.sigma[r] > 0.0) {
      ++r;
    }
    return Factorization(svd.U.leftCols(r), svd.sigma.head(r), svd.V.leftCols(r));
  }

  Index rows() const { return u_.rows(); }
  Index cols() const { return v_.rows(); }
  Index rank() const { return sigma_.size(); }

  const DenseMatrix<S>& u() const { return u_; }
  const DenseMatrix<S>& v() const { return v_; }
  const RealVector& singular_values() const { return sigma_; }

  DenseMatrix<S> dense() const {
    if (rank() == 0) {
      return DenseMatrix<S>::Zero(rows(), cols());
    }
    return u_ * sigma_.template cast<S>().asDiagonal() * v_.adjoint();
  }

  /// Frobenius norm, exact through the orthonormal factors.
  Real norm() const { return sigma_.norm(); }

  /// c * X with |c| folded into the singular values and the phase (sign)
  /// folded into the U columns, keeping sigma >= 0.
  Factorization scaled(S c) const {
    const double mag = std::abs(c);
    if (mag == 0.0) {
      return zero(rows(), cols());
    }
    return Factorization(u_ * (c / S(mag)), sigma_ * mag, v_);
  }

  /// X^H as a factorization (singular values are unchanged).
  Factorization adjoint() const { return Factorization(v_, sigma_, u_); }

  /// Checks the orthonormality invariants; throws on violation.
  void validate(double tol = 1e-10) const {
    const Index r = rank();
    if (r == 0) return;
    const double du =
        (u_.adjoint() * u_ - DenseMatrix<S>::Identity(r, r)).norm();
    const double dv =
        (v_.adjoint() * v_ - DenseMatrix<S>::Identity(r, r)).norm();
    if (du > tol || dv > tol) {
      throw InvalidInputError("Factorization: factors not orthonormal");
    }
  }

private:
  DenseMatrix<S> u_;
  RealVector sigma_;
  DenseMatrix<S> v_;
};

/// Drops singular values <= alpha together with their factor columns;
/// retained values are untouched.
template <class S>
Factorization<S> hard_shrink(const Factorization<S>& f, Real alpha) {
  if (alpha < 0.0) {
    throw InvalidParameterError("hard_shrink: alpha must be >= 0");
  }
  const RealVector& s = f.singular_values();
  Index k = 0;
  while (k < s.size() && s[k] > alpha) ++k;
  return Factorization<S>(f.u().leftCols(k), s.head(k), f.v().leftCols(k));
}

/// Replaces each singular value by max(sigma - alpha, 0) and drops the zeros
/// with their factor columns.
template <class S>
Factorization<S> soft_shrink(const Factorization<S>& f, Real alpha) {
  if (alpha < 0.0) {
    throw InvalidParameterError("soft_shrink: alpha must be >= 0");
  }
  const RealVector& s = f.singular_values();
  Index k = 0;
  while (k < s.size() && s[k] > alpha) ++k;
  return Factorization<S>(f.u().leftCols(k),
                          (s.head(k).array() - alpha).matrix(),
                          f.v().leftCols(k));
}

/// Squared truncation error of hard thresholding at beta.
inline Real hard_error_sq(const RealVector& sigma, Real beta) {
  Real acc = 0.0;
  for (Index i = sigma.size() - 1; i >= 0 && sigma[i] <= beta; --i) {
    acc += sigma[i] * sigma[i];
  }
  return acc;
}

/// Squared truncation error of soft thresholding at beta.
inline Real soft_error_sq(const RealVector& sigma, Real beta) {
  Real acc = 0.0;
  for (Index i = 0; i < sigma.size(); ++i) {
    const Real clipped = std::min(sigma[i], beta);
    acc += clipped * clipped;
  }
  return acc;
}

/// Largest threshold whose truncation error stays within eps. For Hard the
/// answer lies in {0} union {sigma_j} (the error is a step function); for
/// Soft the piecewise-quadratic equation tail + k beta^2 = eps^2 is solved
/// in closed form on the bracketing interval.
inline Real select_threshold(const RealVector& sigma, Real eps,
                             TruncationMode mode) {
  if (eps < 0.0) {
    throw InvalidParameterError("select_threshold: eps must be >= 0");
  }
  const Index r = sigma.size();
  if (r == 0 || eps == 0.0) {
    return 0.0;
  }
  const Real eps2 = eps * eps;
  const Real total2 = sigma.squaredNorm();
  if (eps2 >= total2) {
    return sigma[0];  // everything may go
  }

  if (mode == TruncationMode::Hard) {
    // Scan candidate values in descending order; the first admissible
    // group start wins. tail2[j] = sum_{i >= j} sigma_i^2.
    std::vector<Real> tail2(static_cast<size_t>(r) + 1, 0.0);
    for (Index j = r - 1; j >= 0; --j) {
      tail2[j] = tail2[j + 1] + sigma[j] * sigma[j];
    }
    for (Index j = 0; j < r; ++j) {
      if (j > 0 && sigma[j] == sigma[j - 1]) continue;  // not a group start
      if (tail2[j] <= eps2) {
        return sigma[j];
      }
    }
    return 0.0;
  }

  // Soft: walk the kept-count k downward; on [lo, hi) the error is
  // tail + k beta^2 and is strictly increasing.
  Real tail = 0.0;
  for (Index k = r; k >= 1; --k) {
    const Real lo = (k == r) ? 0.0 : sigma[k];
    const Real hi = sigma[k - 1];
    if (lo < hi) {
      if (Real(k) * hi * hi + tail > eps2) {
        return std::sqrt(std::max(eps2 - tail, 0.0) / Real(k));
      }
    }
    tail += sigma[k - 1] * sigma[k - 1];
  }
  return sigma[0];
}

/// Tolerance-driven truncation T_eps: threshold selection followed by the
/// matching shrink operator. ||F - truncate(F)|| <= eps.
template <class S>
Factorization<S> truncate(const Factorization<S>& f, Real eps,
                          TruncationMode mode) {
  const Real alpha = select_threshold(f.singular_values(), eps, mode);
  return mode == TruncationMode::Hard ? hard_shrink(f, alpha)
                                      : soft_shrink(f, alpha);
}

/// A factored term left * diag(weights) * right^H without orthonormality
/// requirements; weights may carry either sign. Used to feed operator
/// images into the rounding routine.
template <class S>
struct LowRankTerm {
  DenseMatrix<S> left;
  RealVector weights;
  DenseMatrix<S> right;
};

/// Rounds a sum of factored terms into one factorization within eps:
/// concatenate the factors, column-pivoted QR on both sides, truncate the
/// small core R1 P1^T * diag(weights) * P2 R2^H, multiply back.
template <class S>
Factorization<S> rounded_sum_terms(std::span<const LowRankTerm<S>> terms,
                                   Real eps, TruncationMode mode) {
  if (terms.empty()) {
    throw InvalidInputError("rounded_sum: empty term list");
  }
  const Index m1 = terms[0].left.rows();
  const Index m2 = terms[0].right.rows();
  Index total = 0;
  for (const auto& t : terms) {
    if (t.left.rows() != m1 || t.right.rows() != m2 ||
        t.left.cols() != t.weights.size() || t.right.cols() != t.weights.size()) {
      throw InvalidInputError("rounded_sum: term dimensions disagree");
    }
    total += t.weights.size();
  }
  if (total == 0) {
    return Factorization<S>::zero(m1, m2);
  }

  DenseMatrix<S> uhat(m1, total);
  DenseMatrix<S> vhat(m2, total);
  RealVector shat(total);
  Index at = 0;
  for (const auto& t : terms) {
    const Index r = t.weights.size();
    uhat.middleCols(at, r) = t.left;
    vhat.middleCols(at, r) = t.right;
    shat.segment(at, r) = t.weights;
    at += r;
  }

  PivotedQr<S> qu = qr_column_pivoted(uhat);
  PivotedQr<S> qv = qr_column_pivoted(vhat);
  if (qu.rank == 0 || qv.rank == 0) {
    return Factorization<S>::zero(m1, m2);
  }

  DenseMatrix<S> mid = shat.template cast<S>().asDiagonal();
  DenseMatrix<S> core = qu.R * (qu.P.transpose() * mid * qv.P) * qv.R.adjoint();

  ThinSvd<S> svd = thin_svd(core);
  // Core singular values below the roundoff scale of the assembled sum are
  // accumulation noise (exactly cancelling terms leave O(u) residue in the
  // gemm partial sums); they are numerical zeros at every tolerance.
  const Real noise_floor = 32.0 * std::numeric_limits<Real>::epsilon() *
                           shat.cwiseAbs().maxCoeff();
  Index live = svd.sigma.size();
  while (live > 0 && svd.sigma[live - 1] <= noise_floor) --live;
  const RealVector sigma = svd.sigma.head(live);

  const Real alpha = select_threshold(sigma, eps, mode);
  Index k = 0;
  while (k < live && sigma[k] > alpha) ++k;
  RealVector kept = sigma.head(k);
  if (mode == TruncationMode::Soft) {
    kept.array() -= alpha;
  }
  return Factorization<S>(qu.Q * svd.U.leftCols(k), std::move(kept),
                          qv.Q * svd.V.leftCols(k));
}

/// Rounded sum of factorizations sharing a shape.
template <class S>
Factorization<S> rounded_sum(std::span<const Factorization<S>> terms, Real eps,
                             TruncationMode mode) {
  std::vector<LowRankTerm<S>> raw;
  raw.reserve(terms.size());
  for (const auto& f : terms) {
    raw.push_back(LowRankTerm<S>{f.u(), f.singular_values(), f.v()});
  }
  return rounded_sum_terms<S>(raw, eps, mode);
}

template <class S>
Factorization<S> rounded_sum(std::initializer_list<Factorization<S>> terms,
                             Real eps, TruncationMode mode) {
  return rounded_sum(std::span<const Factorization<S>>(terms.begin(), terms.size()),
                     eps, mode);
}

}  // namespace lrsdc
