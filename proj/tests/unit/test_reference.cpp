// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <numbers>

#include "lrsdc/problems.hpp"
#include "lrsdc/reference.hpp"
#include "test_support.hpp"

using namespace lrsdc;
using lrsdc::testing::random_factorization;
using lrsdc::testing::random_matrix;
using lrsdc::testing::random_ode;

namespace {
constexpr Real kPi = std::numbers::pi;
}

TEST_SUITE_BEGIN("fast");

TEST_CASE("rk4 keeps a constant solution constant") {
  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::scaled_identity(3, 0.0), Op::identity(3));
  LinearMatrixODE<Real> ode(std::move(terms));
  RealMatrix x0 = random_matrix<Real>(3, 3, lrsdc::testing::rng());
  RealVector sample(2);
  sample << 0.0, 1.0;
  auto ref = rk4_dense(ode, x0, 0.0, 1.0, 10, sample);
  CHECK((ref.states[1] - x0).norm() == 0.0);
}

TEST_CASE("rk4 solves the scalar exponential to high accuracy") {
  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::scaled_identity(1, -1.0), Op::identity(1));
  LinearMatrixODE<Real> ode(std::move(terms));
  RealMatrix x0(1, 1);
  x0 << 1.0;
  RealVector sample(1);
  sample << 1.0;
  auto ref = rk4_dense(ode, x0, 0.0, 1.0, 100, sample);
  CHECK(std::abs(ref.states[0](0, 0) - std::exp(-1.0)) <= 1e-9);
}

TEST_CASE("rk4 rejects sample times off the step grid") {
  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::scaled_identity(1, -1.0), Op::identity(1));
  LinearMatrixODE<Real> ode(std::move(terms));
  RealMatrix x0(1, 1);
  x0 << 1.0;
  RealVector sample(1);
  sample << 0.55;
  CHECK_THROWS_AS(rk4_dense(ode, x0, 0.0, 1.0, 10, sample),
                  InvalidParameterError);
}

TEST_CASE("implicit Euler dense obeys its closed forms") {
  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::scaled_identity(1, -3.0), Op::identity(1));
  LinearMatrixODE<Real> ode(std::move(terms));
  RealMatrix x(1, 1);
  x << 2.0;
  CHECK((implicit_euler_dense(ode, x, 0.0, 0.0) - x).norm() == 0.0);
  RealMatrix next = implicit_euler_dense(ode, x, 0.0, 0.1);
  CHECK(next(0, 0) == doctest::Approx(2.0 / (1.0 + 0.3)).epsilon(1e-13));
}

TEST_CASE_TEMPLATE("implicit Euler dense residual on random systems", S, Real,
                   Complex) {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<S>(6, 6, 2, true, gen);
  DenseMatrix<S> x = random_matrix<S>(6, 6, gen);
  const Real dt = 0.07;
  DenseMatrix<S> next = implicit_euler_dense(ode, x, 0.1, dt);
  DenseMatrix<S> res = next - dt * apply_dense(ode, next, 0.1 + dt) - x;
  CHECK(res.norm() <= 1e-12 * x.norm());
}

TEST_CASE("reference cache round-trips bit-exactly") {
  auto& gen = lrsdc::testing::rng();
  ReferenceSolution<Complex> ref;
  ref.times = RealVector::LinSpaced(3, 0.0, 1.0);
  ref.steps = 64;
  for (int i = 0; i < 3; ++i) {
    ref.states.push_back(random_matrix<Complex>(5, 4, gen));
  }
  const std::string path =
      (std::filesystem::temp_directory_path() / "lrsdc-refcache-test.ref")
          .string();
  save_reference(path, ref);
  ReferenceSolution<Complex> loaded;
  REQUIRE(load_reference(path, &loaded));
  CHECK(loaded.steps == 64);
  CHECK((loaded.times - ref.times).norm() == 0.0);
  for (int i = 0; i < 3; ++i) {
    CHECK((loaded.states[i] - ref.states[i]).norm() == 0.0);
  }
  // Field tag mismatch refuses to load.
  ReferenceSolution<Real> wrong;
  CHECK_FALSE(load_reference(path, &wrong));
  std::filesystem::remove(path);
}

TEST_CASE("rank curve of the rank-1 exact solution stays at 1") {
  const PeriodicGrid g(48);
  auto p = example1_manufactured(g, g);
  ReferenceSolution<Real> ref;
  ref.times = RealVector::LinSpaced(5, 0.0, kPi);
  for (Index i = 0; i < 5; ++i) {
    ref.states.push_back(p.exact_lowrank(ref.times[i]).dense());
  }
  auto curve = reference_rank_curve(ref, 1e-6, TruncationMode::Hard);
  for (const auto& [t, r] : curve) {
    CHECK(r == 1);
  }
}

TEST_CASE("rank curve collapses to zero above the norm") {
  auto& gen = lrsdc::testing::rng();
  ReferenceSolution<Real> ref;
  ref.times = RealVector::LinSpaced(2, 0.0, 1.0);
  ref.states.push_back(random_matrix<Real>(6, 6, gen));
  ref.states.push_back(random_matrix<Real>(6, 6, gen));
  const Real big = 10.0 * ref.states[0].norm() + 10.0 * ref.states[1].norm();
  for (auto mode : {TruncationMode::Hard, TruncationMode::Soft}) {
    auto curve = reference_rank_curve(ref, big, mode);
    CHECK(curve[0].second == 0);
    CHECK(curve[1].second == 0);
  }
}

TEST_SUITE_END();

TEST_SUITE_BEGIN("slow");

TEST_CASE("rk4 matches the manufactured exact solution") {
  const PeriodicGrid g(64);
  auto p = example1_manufactured(g, g);
  RealVector sample(1);
  sample << kPi;
  auto ref = rk4_dense(p.ode, p.x0.dense(), 0.0, kPi, 2000, sample);
  const RealMatrix want = p.exact_lowrank(kPi).dense();
  CHECK((ref.states[0] - want).norm() <= 1e-8 * want.norm());
}

TEST_CASE("rotation soft rank curve is pi-periodic within one rank") {
  const PeriodicGrid g(64);
  auto p = example4_rotation(g, g);
  RealVector sample(9);
  for (int i = 0; i < 9; ++i) sample[i] = 2.0 * kPi * i / 8.0;
  auto ref = rk4_dense(p.ode, p.x0.dense(), 0.0, 2.0 * kPi, 4000, sample);
  // Fourth-order tolerance C h^4 at the desk-scale discretization.
  const Real c = 2.0 / (8.0 * kPi / 64.0);
  const Real eps = c * std::pow(kPi / 200.0, 4);
  auto curve = reference_rank_curve(ref, eps, TruncationMode::Soft);
  for (int i = 0; i + 4 < 9; ++i) {
    CHECK(std::abs(static_cast<long>(curve[i].second) -
                   static_cast<long>(curve[i + 4].second)) <= 1);
  }
}

TEST_SUITE_END();
