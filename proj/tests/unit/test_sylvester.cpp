// Copyright (c) 2026 The lrsdc authors
// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include "lrsdc/sylvester.hpp"
#include "test_support.hpp"

using namespace lrsdc;
using lrsdc::testing::random_factorization;
using lrsdc::testing::random_matrix;
using lrsdc::testing::random_ode;

namespace {

template <class S>
std::vector<DenseMatrix<S>> as_vec(std::initializer_list<DenseMatrix<S>> ms) {
  return std::vector<DenseMatrix<S>>(ms);
}

}  // namespace

TEST_SUITE_BEGIN("fast");

TEST_CASE("s-step with dt = 0 returns the rhs") {
  auto& gen = lrsdc::testing::rng();
  auto a = as_vec<Real>({random_matrix<Real>(4, 4, gen)});
  auto b = as_vec<Real>({random_matrix<Real>(4, 4, gen)});
  RealMatrix rhs = random_matrix<Real>(4, 4, gen);
  CHECK((solve_s_step<Real>(a, b, 0.0, rhs) - rhs).norm() == 0.0);
}

TEST_CASE("scalar s-step has the closed form rhs / (1 - dt a b)") {
  RealMatrix a(1, 1), b(1, 1), rhs(1, 1);
  a << 0.7;
  b << -1.3;
  rhs << 2.0;
  const Real dt = 0.37;
  RealMatrix s = solve_s_step<Real>(as_vec<Real>({a}), as_vec<Real>({b}), dt, rhs);
  CHECK(s(0, 0) == doctest::Approx(2.0 / (1.0 - dt * 0.7 * (-1.3))).epsilon(1e-12));
}

TEST_CASE_TEMPLATE("s-step residual contract on random stable instances", S,
                   Real, Complex) {
  auto& gen = lrsdc::testing::rng();
  for (int rep = 0; rep < 5; ++rep) {
    std::vector<DenseMatrix<S>> a, b;
    for (int j = 0; j < 2; ++j) {
      DenseMatrix<S> aj = random_matrix<S>(6, 6, gen);
      DenseMatrix<S> bj = random_matrix<S>(6, 6, gen);
      a.push_back(aj / S(aj.norm()));
      b.push_back(bj / S(bj.norm()));
    }
    DenseMatrix<S> rhs = random_matrix<S>(6, 6, gen);
    SolveStats stats;
    DenseMatrix<S> s = solve_s_step<S>(a, b, 0.25, rhs, &stats);
    DenseMatrix<S> res = s;
    for (int j = 0; j < 2; ++j) res -= 0.25 * (a[j] * s * b[j].adjoint());
    CHECK((res - rhs).norm() <= 1e-10 * rhs.norm());
    CHECK(stats.residual <= stats.tolerance);
  }
}

TEST_CASE("s-step takes the iterative path above the dense cap") {
  auto& gen = lrsdc::testing::rng();
  std::vector<RealMatrix> a, b;
  RealMatrix aj = random_matrix<Real>(40, 40, gen);
  RealMatrix bj = random_matrix<Real>(40, 40, gen);
  a.push_back(aj / aj.norm());
  b.push_back(bj / bj.norm());
  RealMatrix rhs = random_matrix<Real>(40, 40, gen);
  SStepOptions opts;
  opts.dense_vec_cap = 100;  // 40 * 40 = 1600 exceeds it
  SolveStats stats;
  RealMatrix s = solve_s_step<Real>(a, b, 0.2, rhs, &stats, opts);
  RealMatrix res = s - 0.2 * (a[0] * s * b[0].transpose());
  CHECK((res - rhs).norm() <= 1e-10 * rhs.norm());
}

TEST_CASE("s-step reports singular projected systems") {
  RealMatrix a(1, 1), b(1, 1), rhs(1, 1);
  a << 1.0;
  b << 1.0;
  rhs << 1.0;
  CHECK_THROWS_AS(
      solve_s_step<Real>(as_vec<Real>({a}), as_vec<Real>({b}), 1.0, rhs),
      SingularSystemError);
}

TEST_CASE("s-step refuses ranks beyond the cap") {
  auto& gen = lrsdc::testing::rng();
  SStepOptions opts;
  opts.rank_cap = 8;
  auto a = as_vec<Real>({random_matrix<Real>(9, 9, gen)});
  auto b = as_vec<Real>({random_matrix<Real>(9, 9, gen)});
  RealMatrix rhs = random_matrix<Real>(9, 9, gen);
  CHECK_THROWS_AS(solve_s_step<Real>(a, b, 0.1, rhs, nullptr, opts),
                  CapacityError);
}

TEST_CASE("tall solve with dt = 0 returns the rhs") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(10, 8, 2, false, gen);
  auto basis = random_factorization<Real>(8, 8, 3, gen).u();
  RealMatrix rhs = random_matrix<Real>(10, 3, gen);
  RealMatrix k = solve_tall_sylvester(ode, basis, 0.0, rhs, SylvesterSide::K);
  CHECK((k - rhs).norm() == 0.0);
}

TEST_CASE("tall solve matches the entrywise formula for diagonal operators") {
  // Diagonal A, B with the canonical basis turn the equation entrywise:
  // k_il = rhs_il / (1 - dt a_i c_l).
  const Index m1 = 7, m2 = 5, r = 3;
  auto& gen = lrsdc::testing::rng();
  RealVector da = random_matrix<Real>(m1, 1, gen).col(0).cwiseAbs();
  RealVector db = random_matrix<Real>(m2, 1, gen).col(0).cwiseAbs();
  using Op = CoefficientOperator<Real>;
  std::vector<std::pair<Op, Op>> terms;
  terms.emplace_back(Op::diagonal(da), Op::diagonal(db));
  LinearMatrixODE<Real> ode(std::move(terms));

  RealMatrix basis = RealMatrix::Identity(m2, r);
  RealMatrix rhs = random_matrix<Real>(m1, r, gen);
  const Real dt = 0.11;
  TallSolveOptions opts;
  opts.eps_active = 1e-6;
  SolveStats stats;
  RealMatrix k =
      solve_tall_sylvester(ode, basis, dt, rhs, SylvesterSide::K, &stats, opts);

  for (Index i = 0; i < m1; ++i) {
    for (Index l = 0; l < r; ++l) {
      const Real want = rhs(i, l) / (1.0 - dt * da[i] * db[l]);
      CHECK(k(i, l) == doctest::Approx(want).epsilon(1e-7));
    }
  }
  CHECK(stats.residual <= stats.tolerance);
}

TEST_CASE_TEMPLATE("L side equals the K side of the transposed problem", S,
                   Real, Complex) {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<S>(9, 7, 2, false, gen);
  auto u = random_factorization<S>(9, 9, 3, gen).u();
  DenseMatrix<S> rhs = random_matrix<S>(7, 3, gen);
  const Real dt = 0.15;

  DenseMatrix<S> l = solve_tall_sylvester(ode, u, dt, rhs, SylvesterSide::L);

  // The L side is the K side with the term roles swapped.
  std::vector<std::pair<CoefficientOperator<S>, CoefficientOperator<S>>> sw;
  for (Index j = 0; j < ode.term_count(); ++j) {
    sw.emplace_back(ode.term(j).second, ode.term(j).first);
  }
  LinearMatrixODE<S> swapped(std::move(sw));
  DenseMatrix<S> k = solve_tall_sylvester(swapped, u, dt, rhs, SylvesterSide::K);
  CHECK((l - k).norm() <= 1e-9 * (l.norm() + 1.0));
}

TEST_CASE("tall solve residual meets the derived tolerance") {
  auto& gen = lrsdc::testing::rng();
  auto ode = random_ode<Real>(30, 24, 3, false, gen);
  auto basis = random_factorization<Real>(24, 24, 5, gen).u();
  RealMatrix rhs = random_matrix<Real>(30, 5, gen);
  TallSolveOptions opts;
  opts.eps_active = 1e-7;
  SolveStats stats;
  RealMatrix k = solve_tall_sylvester(ode, basis, 0.3, rhs, SylvesterSide::K,
                                      &stats, opts);
  RealMatrix res = k;
  for (Index j = 0; j < ode.term_count(); ++j) {
    RealMatrix bv = ode.term(j).second.apply(basis);
    RealMatrix c = bv.adjoint() * basis;
    res -= 0.3 * (ode.term(j).first.apply(k) * c);
  }
  const double rel = (res - rhs).norm() / rhs.norm();
  CHECK(rel <= stats.tolerance);
  CHECK(stats.tolerance ==
        doctest::Approx(std::max(1e-12, 1e-2 * opts.eps_active / rhs.norm())));
}

TEST_SUITE_END();
