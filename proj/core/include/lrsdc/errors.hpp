// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace lrsdc {

/// Data handed to a kernel violates its contract (non-finite entries,
/// incompatible shapes, empty term lists).
class InvalidInputError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A scalar parameter is outside its documented domain (negative tolerance,
/// odd grid size, zero subinterval count).
class InvalidParameterError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// A linear system is singular to working precision. Carries the reciprocal
/// condition estimate of the factored matrix.
class SingularSystemError : public std::runtime_error {
public:
  SingularSystemError(const std::string& what, double rcond)
      : std::runtime_error(what), rcond_(rcond) {}
  double rcond() const noexcept { return rcond_; }

private:
  double rcond_;
};

/// An iterative solver ran out of iterations. Carries the final relative
/// residual.
class SolverFailureError : public std::runtime_error {
public:
  SolverFailureError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

/// A projected system exceeds the configured rank cap; a larger truncation
/// tolerance keeps the merged rank in bounds.
class CapacityError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

}  // namespace lrsdc
