// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include "lrsdc/problems.hpp"

#include <cmath>
#include <numbers>

namespace lrsdc {

namespace {

constexpr Real kPi = std::numbers::pi;

RealVector grid_fn(const PeriodicGrid& g, const std::function<Real(Real)>& f) {
  RealVector out(g.n);
  for (Index i = 0; i < g.n; ++i) {
    out[i] = f(g.points[i]);
  }
  return out;
}

ComplexMatrix to_complex(const RealMatrix& m) {
  return m.cast<Complex>();
}

}  // namespace

PeriodicGrid::PeriodicGrid(Index n_in) : n(n_in) {
  if (n < 8 || n % 2 != 0) {
    throw InvalidParameterError("PeriodicGrid: N must be even and >= 8");
  }
  spacing = 4.0 * kPi / static_cast<Real>(n);
  points.resize(n);
  for (Index i = 0; i < n; ++i) {
    points[i] = -2.0 * kPi + spacing * static_cast<Real>(i);
  }
}

std::pair<RealMatrix, RealMatrix> fourier_diff_matrices(const PeriodicGrid& grid) {
  const Index n = grid.n;
  if (n % 2 != 0) {
    throw InvalidParameterError("fourier_diff_matrices: N must be even");
  }
  // Classical even-N matrices for period 2 pi, rescaled to period 4 pi by
  // the chain rule (factor 1/2 per derivative).
  const Real scale = 2.0 * kPi / (4.0 * kPi);
  const Real h = 2.0 * kPi / static_cast<Real>(n);
  RealMatrix d1 = RealMatrix::Zero(n, n);
  RealMatrix d2 = RealMatrix::Zero(n, n);
  for (Index i = 0; i < n; ++i) {
    for (Index j = 0; j < n; ++j) {
      if (i == j) {
        d2(i, i) = -kPi * kPi / (3.0 * h * h) - 1.0 / 6.0;
        continue;
      }
      const Index k = i - j;
      const Real sign = (k % 2 == 0) ? 1.0 : -1.0;
      const Real half = 0.5 * h * static_cast<Real>(k);
      d1(i, j) = sign * 0.5 / std::tan(half);
      const Real s = std::sin(half);
      d2(i, j) = -sign * 0.5 / (s * s);
    }
  }
  d1 *= scale;
  d2 *= scale * scale;
  return {std::move(d1), std::move(d2)};
}

BenchmarkProblem<Real> example1_manufactured(const PeriodicGrid& gx,
                                             const PeriodicGrid& gy) {
  const Real d = 0.2;
  auto [d1x, d2x] = fourier_diff_matrices(gx);
  auto [d1y, d2y] = fourier_diff_matrices(gy);

  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::dense(d * d2x), Op::identity(gy.n));
  terms.emplace_back(Op::identity(gx.n), Op::dense(d * d2y));
  terms.emplace_back(Op::dense(d1x), Op::diagonal(gy.points));
  terms.emplace_back(Op::diagonal(-gx.points), Op::dense(d1y));

  const RealVector gxv = grid_fn(gx, [](Real x) { return std::exp(-x * x); });
  const RealVector gyv =
      grid_fn(gy, [](Real y) { return std::exp(-3.0 * y * y); });

  // Source prefactor 6d - 4xy - 4d x^2 - 36 d y^2 applied to the Gaussian,
  // assembled from four rank-1 terms and compressed once.
  std::vector<LowRankTerm<Real>> parts;
  const auto rank1 = [](const RealVector& a, const RealVector& b, Real w) {
    RealVector s(1);
    s[0] = w;
    return LowRankTerm<Real>{a, s, b};
  };
  parts.push_back(rank1(gxv, gyv, 6.0 * d));
  parts.push_back(rank1((gx.points.array() * gxv.array()).matrix(),
                        (gy.points.array() * gyv.array()).matrix(), -4.0));
  parts.push_back(rank1(
      (gx.points.array().square() * gxv.array()).matrix(), gyv, -4.0 * d));
  parts.push_back(rank1(
      gxv, (gy.points.array().square() * gyv.array()).matrix(), -36.0 * d));
  Factorization<Real> g0 =
      rounded_sum_terms<Real>(parts, 0.0, TruncationMode::Hard);

  Factorization<Real> x0 = Factorization<Real>::rank_one(gxv, gyv);

  BenchmarkProblem<Real> p{
      "manufactured",
      LinearMatrixODE<Real>(std::move(terms),
                            [g0, d](Real t) {
                              return g0.scaled(std::exp(-2.0 * d * t));
                            }),
      x0,
      [x0, d](Real t) { return x0.scaled(std::exp(-2.0 * d * t)); },
      {}};
  return p;
}

BenchmarkProblem<Complex> example2_schrodinger(const PeriodicGrid& gx,
                                               const PeriodicGrid& gy) {
  using namespace std::complex_literals;
  auto [d1x, d2x] = fourier_diff_matrices(gx);
  auto [d1y, d2y] = fourier_diff_matrices(gy);

  // i u_t = -1/2 Lap u + (x^2 - x y + 3/2 y^2) u. Complex scalars fold into
  // the A side so every B factor stays real-symmetric.
  using Op = CoefficientOperator<Complex>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::dense(0.5i * to_complex(d2x)), Op::identity(gy.n));
  terms.emplace_back(Op::scaled_identity(gx.n, 0.5i),
                     Op::dense(to_complex(d2y)));
  terms.emplace_back(
      Op::diagonal((-1.0i * gx.points.array().square()).matrix()),
      Op::identity(gy.n));
  terms.emplace_back(Op::diagonal((1.0i * gx.points.array()).matrix()),
                     Op::diagonal(gy.points.cast<Complex>()));
  terms.emplace_back(Op::scaled_identity(gx.n, -1.5i),
                     Op::diagonal(gy.points.array().square().matrix().cast<Complex>()));

  // The printed initial data grows at the boundary; the decaying Gaussian
  // (1/sqrt(pi)) exp(-x^2/2 - (y-1)^2/2) is used instead.
  const RealVector ux =
      grid_fn(gx, [](Real x) { return std::exp(-0.5 * x * x); });
  const RealVector uy = grid_fn(
      gy, [](Real y) { return std::exp(-0.5 * (y - 1.0) * (y - 1.0)); });
  Factorization<Complex> x0 = Factorization<Complex>::rank_one(
      ux.cast<Complex>(), uy.cast<Complex>());
  x0 = x0.scaled(Complex(1.0 / std::sqrt(kPi), 0.0));

  return BenchmarkProblem<Complex>{
      "schrodinger", LinearMatrixODE<Complex>(std::move(terms)), std::move(x0),
      {}, {}};
}

BenchmarkProblem<Real> example3_anisotropic(const PeriodicGrid& gx,
                                            const PeriodicGrid& gy) {
  const Real d = 0.01;
  auto [d1x, d2x] = fourier_diff_matrices(gx);
  auto [d1y, d2y] = fourier_diff_matrices(gy);

  // Coefficients as printed (the b_i formulas use the 0.5x argument; they
  // are evaluated on the y grid).
  const RealVector a1 =
      grid_fn(gx, [](Real x) { return 1.0 + 0.1 * std::sin(0.5 * x); });
  const RealVector b1 =
      grid_fn(gy, [](Real y) { return 1.0 + 0.1 * std::cos(0.5 * y); });
  const RealVector a2 =
      grid_fn(gx, [](Real x) { return 0.15 + 0.1 * std::sin(0.5 * x); });
  const RealVector b2 =
      grid_fn(gy, [](Real y) { return 0.15 + 0.1 * std::cos(0.5 * y); });
  const RealVector a3 =
      grid_fn(gx, [](Real x) { return 0.15 + 0.1 * std::cos(0.5 * x); });
  const RealVector b3 =
      grid_fn(gy, [](Real y) { return 0.15 + 0.1 * std::sin(0.5 * y); });
  const RealVector a4 =
      grid_fn(gx, [](Real x) { return 1.0 + 0.1 * std::sin(0.5 * x); });
  const RealVector b4 =
      grid_fn(gy, [](Real y) { return 1.0 + 0.1 * std::cos(0.5 * y); });

  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  // b1(y) d_x(a1(x) d_x u)
  terms.emplace_back(Op::dense(d * (d1x * a1.asDiagonal() * d1x).eval()),
                     Op::diagonal(b1));
  // b2(y) d_x d_y (a2(x) u)
  terms.emplace_back(Op::dense(d * (d1x * a2.asDiagonal()).eval()),
                     Op::dense((b2.asDiagonal() * d1y).eval()));
  // a3(x) d_x d_y (b3(y) u)
  terms.emplace_back(Op::dense(d * (a3.asDiagonal() * d1x).eval()),
                     Op::dense((d1y * b3.asDiagonal()).eval()));
  // a4(x) d_y (b4(y) u)
  terms.emplace_back(Op::diagonal(d * a4),
                     Op::dense((d1y * b4.asDiagonal()).eval()));
  // rotation: + y u_x - x u_y
  terms.emplace_back(Op::dense(d1x), Op::diagonal(gy.points));
  terms.emplace_back(Op::diagonal(-gx.points), Op::dense(d1y));

  Factorization<Real> x0 = Factorization<Real>::rank_one(
      grid_fn(gx, [](Real x) { return std::exp(-x * x); }),
      grid_fn(gy, [](Real y) { return std::exp(-9.0 * y * y); }));

  return BenchmarkProblem<Real>{
      "anisotropic", LinearMatrixODE<Real>(std::move(terms)), std::move(x0),
      {}, {}};
}

Real rotation_exact_value(Real x, Real y, Real t) {
  const Real xc = std::cos(t) * x + std::sin(t) * y;
  const Real yc = -std::sin(t) * x + std::cos(t) * y;
  return std::exp(-(5.0 * xc * xc + 5.0 * yc * yc + 8.0 * xc * yc));
}

BenchmarkProblem<Real> example4_rotation(const PeriodicGrid& gx,
                                         const PeriodicGrid& gy) {
  auto [d1x, d2x] = fourier_diff_matrices(gx);
  auto [d1y, d2y] = fourier_diff_matrices(gy);

  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::dense(d1x), Op::diagonal(gy.points));
  terms.emplace_back(Op::diagonal(-gx.points), Op::dense(d1y));

  // The cross term 8xy makes the initial Gaussian non-separable; assemble
  // it densely (bounded by 1, the quadratic form is positive definite) and
  // factor at machine precision.
  RealMatrix u0(gx.n, gy.n);
  for (Index i = 0; i < gx.n; ++i) {
    for (Index j = 0; j < gy.n; ++j) {
      u0(i, j) = rotation_exact_value(gx.points[i], gy.points[j], 0.0);
    }
  }
  Factorization<Real> x0 = Factorization<Real>::from_dense(u0, 1e-14);

  const RealVector xs = gx.points;
  const RealVector ys = gy.points;
  auto exact = [xs, ys](Real t) {
    RealMatrix out(xs.size(), ys.size());
    for (Index i = 0; i < xs.size(); ++i) {
      for (Index j = 0; j < ys.size(); ++j) {
        out(i, j) = rotation_exact_value(xs[i], ys[j], t);
      }
    }
    return out;
  };

  return BenchmarkProblem<Real>{
      "rotation", LinearMatrixODE<Real>(std::move(terms)), std::move(x0),
      {}, std::move(exact)};
}

const std::vector<std::string>& problem_ids() {
  static const std::vector<std::string> ids = {"manufactured", "schrodinger",
                                               "anisotropic", "rotation"};
  return ids;
}

AnyProblem build_problem(const std::string& id, const PeriodicGrid& gx,
                         const PeriodicGrid& gy) {
  if (id == "manufactured") return example1_manufactured(gx, gy);
  if (id == "schrodinger") return example2_schrodinger(gx, gy);
  if (id == "anisotropic") return example3_anisotropic(gx, gy);
  if (id == "rotation") return example4_rotation(gx, gy);
  throw InvalidParameterError("unknown problem id: " + id);
}

Real default_final_time(const std::string& id) {
  return id == "schrodinger" ? 2.0 : kPi;
}

}  // namespace lrsdc
