// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <numbers>

#include "lrsdc/sdc.hpp"

namespace lrsdc {

namespace {

// Legendre P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre_with_derivative(int n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {p0, 0.0};
  for (int k = 2; k <= n; ++k) {
    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
    p0 = p1;
    p1 = p2;
  }
  const double d = n * (x * p1 - p0) / (x * x - 1.0);
  return {p1, d};
}

}  // namespace

RealVector lobatto_points_unit(int subintervals) {
  const int p = subintervals;
  if (p < 1) {
    throw InvalidParameterError("lobatto_points_unit: need P >= 1");
  }
  RealVector x(p + 1);
  if (p == 1) {
    x << -1.0, 1.0;
    return x;
  }
  // Newton on (1 - x^2) P_P'(x) from the Chebyshev-Gauss-Lobatto guess; the
  // interior iteration x <- x - (x L_P - L_{P-1}) / ((P+1) L_P) is the
  // classical lglnodes update.
  x[0] = -1.0;
  x[p] = 1.0;
  for (int i = 1; i < p; ++i) {
    double xi = -std::cos(std::numbers::pi * i / p);
    for (int it = 0; it < 100; ++it) {
      double lp = 1.0;
      double lq = xi;
      for (int k = 2; k <= p; ++k) {
        const double ln = ((2.0 * k - 1.0) * xi * lq - (k - 1.0) * lp) / k;
        lp = lq;
        lq = ln;
      }
      const double dx = (xi * lq - lp) / ((p + 1) * lq);
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    x[i] = xi;
  }
  return x;
}

std::pair<RealVector, RealVector> gauss_legendre(int points) {
  if (points < 1) {
    throw InvalidParameterError("gauss_legendre: need at least one point");
  }
  RealVector x(points);
  RealVector w(points);
  for (int i = 0; i < points; ++i) {
    double xi = std::cos(std::numbers::pi * (i + 0.75) / (points + 0.5));
    double d = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [val, der] = legendre_with_derivative(points, xi);
      d = der;
      const double dx = val / der;
      xi -= dx;
      if (std::abs(dx) < 1e-15) break;
    }
    const auto [val, der] = legendre_with_derivative(points, xi);
    d = der;
    x[points - 1 - i] = xi;  // ascending
    w[points - 1 - i] = 2.0 / ((1.0 - xi * xi) * d * d);
  }
  return {x, w};
}

SdcGrid lobatto_grid(int subintervals, Real t0, Real t1) {
  if (subintervals < 1) {
    throw InvalidParameterError("lobatto_grid: need P >= 1");
  }
  if (!(t1 > t0)) {
    throw InvalidParameterError("lobatto_grid: need t1 > t0");
  }
  const int p = subintervals;

  SdcGrid grid;
  grid.subintervals = p;
  const RealVector unit = lobatto_points_unit(p);
  grid.nodes.resize(p + 1);
  for (int i = 0; i <= p; ++i) {
    grid.nodes[i] = t0 + (unit[i] + 1.0) * 0.5 * (t1 - t0);
  }
  grid.nodes[0] = t0;
  grid.nodes[p] = t1;
  grid.sub_steps = grid.nodes.tail(p) - grid.nodes.head(p);

  // Dimensionless interpolatory weights: w(m, s) = (1 / dt_m) times the
  // integral of the Lagrange basis l_s over [xi_m, xi_{m+1}], evaluated by
  // Gauss-Legendre of degree > P on each subinterval.
  const auto [gx, gw] = gauss_legendre(p + 1);
  grid.weights.resize(p, p + 1);
  for (int m = 0; m < p; ++m) {
    const double a = unit[m];
    const double b = unit[m + 1];
    for (int s = 0; s <= p; ++s) {
      double acc = 0.0;
      for (int q = 0; q <= p; ++q) {
        const double xq = 0.5 * (a + b) + 0.5 * (b - a) * gx[q];
        double ell = 1.0;
        for (int j = 0; j <= p; ++j) {
          if (j == s) continue;
          ell *= (xq - unit[j]) / (unit[s] - unit[j]);
        }
        acc += gw[q] * ell;
      }
      // l_s integrated over [a, b] is acc * (b - a) / 2; dividing by the
      // subinterval width (b - a) leaves the dimensionless weight.
      grid.weights(m, s) = 0.5 * acc;
    }
  }
  return grid;
}

}  // namespace lrsdc
