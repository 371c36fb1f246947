// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <complex>

namespace lrsdc {

using Real = double;
using Complex = std::complex<double>;
using Index = Eigen::Index;

/// Runtime tag for the scalar field a problem lives over. Inner products
/// conjugate the first argument when the field is Complex, so that <A,A>
/// is real and nonnegative.
enum class ScalarField { Real, Complex };

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Real> {
  static constexpr ScalarField field = ScalarField::Real;
  static constexpr bool is_complex = false;
};

template <>
struct ScalarTraits<Complex> {
  static constexpr ScalarField field = ScalarField::Complex;
  static constexpr bool is_complex = true;
};

template <class S>
inline constexpr bool is_complex_v = ScalarTraits<S>::is_complex;

template <class S>
inline constexpr ScalarField field_of_v = ScalarTraits<S>::field;

template <class S>
using DenseMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
template <class S>
using DenseVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

using RealMatrix = DenseMatrix<Real>;
using RealVector = DenseVector<Real>;
using ComplexMatrix = DenseMatrix<Complex>;
using ComplexVector = DenseVector<Complex>;

}  // namespace lrsdc
