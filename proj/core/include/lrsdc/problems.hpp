// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>
#include <string>
#include <variant>
#include <vector>

#include "lrsdc/operators.hpp"

namespace lrsdc {

/// Uniform periodic grid on [-2pi, 2pi), right endpoint identified with the
/// left one. N must be even and at least 8.
struct PeriodicGrid {
  explicit PeriodicGrid(Index n);

  Index n = 0;
  Real spacing = 0.0;  // 4 pi / N
  RealVector points;   // -2pi + i * spacing
};

/// Fourier spectral differentiation matrices for first and second
/// derivatives on the grid (period 4 pi).
std::pair<RealMatrix, RealMatrix> fourier_diff_matrices(const PeriodicGrid& grid);

/// A spatially discretized benchmark: the semi-discrete ODE, factored
/// initial data, and (where available) an exact solution in factored or
/// dense-evaluator form.
template <class S>
struct BenchmarkProblem {
  std::string name;
  LinearMatrixODE<S> ode;
  Factorization<S> x0;
  std::function<Factorization<S>(Real)> exact_lowrank;  // may be empty
  std::function<DenseMatrix<S>(Real)> exact_dense;      // may be empty
};

/// Advection-diffusion with a manufactured rank-1 exact solution
/// exp(-(x^2 + 3 y^2 + 2 d t)), d = 1/5.
BenchmarkProblem<Real> example1_manufactured(const PeriodicGrid& gx,
                                             const PeriodicGrid& gy);

/// Schroedinger equation with the quadratic potential
/// (x^2 - x y + 3/2 y^2) and a Gaussian wave packet centered at (0, 1).
BenchmarkProblem<Complex> example2_schrodinger(const PeriodicGrid& gx,
                                               const PeriodicGrid& gy);

/// Solid body rotation with anisotropic variable-coefficient diffusion,
/// d = 0.01.
BenchmarkProblem<Real> example3_anisotropic(const PeriodicGrid& gx,
                                            const PeriodicGrid& gy);

/// Rigid body rotation without diffusion; the exact solution rotates the
/// initial Gaussian exp(-(5x^2 + 5y^2 + 8xy)).
BenchmarkProblem<Real> example4_rotation(const PeriodicGrid& gx,
                                         const PeriodicGrid& gy);

/// The analytic rotation solution of example 4 at an arbitrary point.
Real rotation_exact_value(Real x, Real y, Real t);

using AnyProblem = std::variant<BenchmarkProblem<Real>, BenchmarkProblem<Complex>>;

/// Problem ids exposed to the CLI.
const std::vector<std::string>& problem_ids();

/// Builds a benchmark by id ("manufactured", "schrodinger", "anisotropic",
/// "rotation"); throws InvalidParameterError for unknown ids.
AnyProblem build_problem(const std::string& id, const PeriodicGrid& gx,
                         const PeriodicGrid& gy);

/// Default final time of each benchmark (pi except schrodinger's 2).
Real default_final_time(const std::string& id);

}  // namespace lrsdc
