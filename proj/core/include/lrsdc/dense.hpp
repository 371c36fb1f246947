// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>

#include "lrsdc/errors.hpp"
#include "lrsdc/scalar.hpp"

namespace lrsdc {

/// Relative cutoff deciding the numerical rank in pivoted QR: column i is
/// kept while |R_ii| > cutoff * |R_00|.
inline constexpr double kQrRankCutoff = 1e-14;

/// Reciprocal condition number below which a square system counts as
/// singular to working precision.
inline constexpr double kSingularRcond = 1e-15;

template <class S>
void require_finite(const DenseMatrix<S>& m, const char* who) {
  if (!m.allFinite()) {
    throw InvalidInputError(std::string(who) + ": non-finite entries in input");
  }
}

/// Rank-revealing column-pivoted QR, M * P = Q * R with diag(R) real,
/// nonnegative and nonincreasing. Q has one orthonormal column per
/// numerically independent direction of M.
template <class S>
struct PivotedQr {
  DenseMatrix<S> Q;  // rows(M) x rank
  DenseMatrix<S> R;  // rank x cols(M), upper triangular in pivoted order
  Eigen::PermutationMatrix<Eigen::Dynamic, Eigen::Dynamic> P;
  Index rank = 0;
};

template <class S>
PivotedQr<S> qr_column_pivoted(const DenseMatrix<S>& m,
                               double rel_cutoff = kQrRankCutoff) {
  require_finite(m, "qr_column_pivoted");
  PivotedQr<S> out;
  out.P.setIdentity(m.cols());
  if (m.cols() == 0 || m.rows() == 0) {
    out.Q.resize(m.rows(), 0);
    out.R.resize(0, m.cols());
    return out;
  }

  Eigen::ColPivHouseholderQR<DenseMatrix<S>> qr(m);
  const Index kmax = std::min(m.rows(), m.cols());
  DenseMatrix<S> rfull = qr.matrixR()
                             .topRows(kmax)
                             .template triangularView<Eigen::Upper>();

  const double lead = std::abs(rfull(0, 0));
  Index rank = 0;
  while (rank < kmax && std::abs(rfull(rank, rank)) > rel_cutoff * lead) {
    ++rank;
  }

  DenseMatrix<S> q = DenseMatrix<S>::Identity(m.rows(), rank);
  q.applyOnTheLeft(qr.householderQ());
  out.R = rfull.topRows(rank);

  // Normalize so diag(R) is real and nonnegative; keeps the identity case
  // exactly the identity and makes the factorization deterministic.
  for (Index i = 0; i < rank; ++i) {
    const S d = out.R(i, i);
    const double mag = std::abs(d);
    if (mag > 0.0) {
      const S phase = d / S(mag);
      out.R.row(i) *= S(1.0) / phase;
      q.col(i) *= phase;
    }
  }
  out.Q = std::move(q);
  out.P = qr.colsPermutation();
  out.rank = rank;
  return out;
}

/// Thin SVD, M = U * diag(sigma) * V^H with sigma nonincreasing and
/// nonnegative. sigma has min(rows, cols) entries, including zeros.
template <class S>
struct ThinSvd {
  DenseMatrix<S> U;
  RealVector sigma;
  DenseMatrix<S> V;
};

template <class S>
ThinSvd<S> thin_svd(const DenseMatrix<S>& m) {
  require_finite(m, "thin_svd");
  ThinSvd<S> out;
  const Index k = std::min(m.rows(), m.cols());
  if (k == 0) {
    out.U.resize(m.rows(), 0);
    out.sigma.resize(0);
    out.V.resize(m.cols(), 0);
    return out;
  }
  if (k <= 16) {
    Eigen::JacobiSVD<DenseMatrix<S>> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
  } else {
    Eigen::BDCSVD<DenseMatrix<S>> svd(
        m, Eigen::ComputeThinU | Eigen::ComputeThinV);
    out.U = svd.matrixU();
    out.sigma = svd.singularValues();
    out.V = svd.matrixV();
  }
  return out;
}

/// Solves A * X = B for square nonsingular A by LU with partial pivoting,
/// with one refinement pass if the first residual misses the contract
/// ||A X - B|| <= 1e-10 ||B||.
template <class S>
DenseMatrix<S> solve_dense(const DenseMatrix<S>& a, const DenseMatrix<S>& b) {
  if (a.rows() != a.cols()) {
    throw InvalidInputError("solve_dense: matrix must be square");
  }
  if (a.rows() != b.rows()) {
    throw InvalidInputError("solve_dense: rhs row count mismatch");
  }
  require_finite(a, "solve_dense");
  require_finite(b, "solve_dense");

  Eigen::PartialPivLU<DenseMatrix<S>> lu(a);
  const double rc = lu.rcond();
  if (!(rc > kSingularRcond)) {
    throw SingularSystemError("solve_dense: matrix singular to precision", rc);
  }
  DenseMatrix<S> x = lu.solve(b);

  const double bnorm = b.norm();
  const double tol = 1e-10;
  double res = (a * x - b).norm();
  if (res > tol * bnorm) {
    x += lu.solve(b - a * x);
    res = (a * x - b).norm();
    if (res > tol * bnorm) {
      throw SolverFailureError("solve_dense: residual contract missed",
                               bnorm > 0 ? res / bnorm : res);
    }
  }
  return x;
}

}  // namespace lrsdc
