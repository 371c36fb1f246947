// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <numbers>

#include "lrsdc/mbug.hpp"
#include "lrsdc/problems.hpp"
#include "lrsdc/reference.hpp"
#include "test_support.hpp"

using namespace lrsdc;
using lrsdc::testing::random_factorization;
using lrsdc::testing::random_matrix;
using lrsdc::testing::random_ode;

TEST_SUITE_BEGIN("fast");

TEST_CASE("mbug_step keeps the zero state at zero without a source") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(8, 8, 2, false, gen);
  auto zero = Factorization<Real>::zero(8, 8);
  auto [next, report] =
      mbug_step(ode, zero, 0.0, 0.1, 1e-8, 1e-8, TruncationMode::Hard);
  CHECK(next.rank() == 0);
  CHECK(report.rank_after == 0);
}

TEST_CASE_TEMPLATE(
    "mbug_step with zero tolerances and full merge is implicit Euler", S, Real,
    Complex) {
  auto& gen = lrsdc::testing::rng();
  for (Index n : {8, 12}) {
    auto ode = random_ode<S>(n, n, 2, true, gen);
    auto x = random_factorization<S>(n, n, 4, gen, 0.9);
    const Real dt = 0.05;
    auto [next, report] =
        mbug_step(ode, x, 0.2, dt, 0.0, 0.0, TruncationMode::Hard);
    // Oracle premise: with rank-4 data, two dense terms and the K block the
    // merged basis must span the whole space.
    REQUIRE(report.rank_merged == n);
    DenseMatrix<S> want = implicit_euler_dense(ode, x.dense(), 0.2, dt);
    CHECK((next.dense() - want).norm() <= 1e-9 * want.norm());
  }
}

TEST_CASE("mbug_step one-step accuracy on the manufactured problem") {
  // One step from exact initial data lands within a factor 10 of the dense
  // implicit Euler one-step error.
  const PeriodicGrid grid(32);
  auto p = example1_manufactured(grid, grid);
  const Real dt = std::numbers::pi / 320.0;
  const Real c = 2.0 / (8.0 * std::numbers::pi / 32.0);
  auto [next, report] = mbug_step(p.ode, p.x0, 0.0, dt, c * dt, c * dt * dt,
                                  TruncationMode::Hard);
  const RealMatrix exact = p.exact_lowrank(dt).dense();
  const double err = (next.dense() - exact).norm();
  const RealMatrix euler = implicit_euler_dense(p.ode, p.x0.dense(), 0.0, dt);
  const double euler_err = (euler - exact).norm();
  CHECK(err <= 10.0 * euler_err);
}

TEST_CASE("merged basis contains the previous range") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(20, 16, 3, true, gen);
  auto x = random_factorization<Real>(20, 16, 5, gen);
  auto [next, report] =
      mbug_step(ode, x, 0.0, 0.05, 1e-6, 1e-8, TruncationMode::Hard);
  CHECK(report.basis_defect <= 1e-10);
}

TEST_CASE("rank accounting holds structurally") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(20, 16, 2, true, gen);
  auto x = random_factorization<Real>(20, 16, 4, gen);
  auto f = eval_lowrank(ode, x, 0.0, 1e-6, TruncationMode::Hard);
  auto [next, report] =
      mbug_step(ode, x, 0.0, 0.05, 1e-6, 1e-8, TruncationMode::Hard);
  CHECK(report.rank_after <= report.rank_merged);
  CHECK(report.rank_merged <= report.rank_before + f.rank() + x.rank());
  CHECK(report.rank_before == x.rank());
}

TEST_CASE("mbug_step validates its parameters") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(8, 8, 2, false, gen);
  auto x = random_factorization<Real>(8, 8, 2, gen);
  CHECK_THROWS_AS(mbug_step(ode, x, 0.0, 0.0, 1e-8, 1e-8, TruncationMode::Hard),
                  InvalidParameterError);
  CHECK_THROWS_AS(
      mbug_step(ode, x, 0.0, 0.1, -1e-8, 1e-8, TruncationMode::Hard),
      InvalidParameterError);
}

TEST_SUITE_END();
