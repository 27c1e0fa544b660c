#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "lcqp/oracle.hpp"

using namespace lcqp;
using oracle::BranchSide;
using oracle::RefStatus;

TEST_CASE("reference QP: unconstrained minimizer") {
  Matrix q(2, 2);
  q(0, 0) = 4.0;
  q(0, 1) = q(1, 0) = 1.0;
  q(1, 1) = 3.0;
  Vector c = {-1.0, 2.0};
  Matrix m(0, 2);

  auto res = oracle::reference_qp_solve(q, c, m, {});
  REQUIRE(res.status == RefStatus::Optimal);
  // Solve Q x = -c by hand: det = 11, x = (5/11, -9/11).
  CHECK(res.x[0] == doctest::Approx(5.0 / 11.0).epsilon(1e-12));
  CHECK(res.x[1] == doctest::Approx(-9.0 / 11.0).epsilon(1e-12));
  CHECK(res.active.empty());
}

TEST_CASE("reference QP: active bound with multiplier") {
  // min x^2 - 4x subject to x >= 3: solution x = 3, y = 2x - 4 = 2.
  Matrix q(1, 1);
  q(0, 0) = 2.0;
  Matrix m(1, 1);
  m(0, 0) = 1.0;
  auto res = oracle::reference_qp_solve(q, {-4.0}, m, {3.0});
  REQUIRE(res.status == RefStatus::Optimal);
  CHECK(res.x[0] == doctest::Approx(3.0));
  CHECK(res.y[0] == doctest::Approx(2.0));
  CHECK(res.objective == doctest::Approx(9.0 - 12.0));
  REQUIRE(res.active.size() == 1);
  CHECK(res.active[0] == 0);
}

TEST_CASE("reference QP: equality rows are pinned regardless of sign") {
  // min (x1-1)^2 + (x2-1)^2 with x1 >= 0 forced to equality: x = (0, 1) and
  // the multiplier on the pinned row is negative.
  Matrix q = Matrix::identity(2);
  q(0, 0) = q(1, 1) = 2.0;
  Matrix m(1, 2);
  m(0, 0) = 1.0;
  auto res = oracle::reference_qp_solve(q, {-2.0, -2.0}, m, {0.0}, {0});
  REQUIRE(res.status == RefStatus::Optimal);
  CHECK(res.x[0] == doctest::Approx(0.0));
  CHECK(res.x[1] == doctest::Approx(1.0));
  CHECK(res.y[0] == doctest::Approx(-2.0));

  // Without the equality pin the constraint stays inactive.
  auto free_res = oracle::reference_qp_solve(q, {-2.0, -2.0}, m, {0.0});
  REQUIRE(free_res.status == RefStatus::Optimal);
  CHECK(free_res.x[0] == doctest::Approx(1.0));
  CHECK(free_res.active.empty());
}

TEST_CASE("reference QP: infeasible rows") {
  Matrix q(1, 1);
  q(0, 0) = 2.0;
  Matrix m(2, 1);
  m(0, 0) = 1.0;   // x >= 1
  m(1, 0) = -1.0;  // -x >= 0, i.e. x <= 0
  auto res = oracle::reference_qp_solve(q, {0.0}, m, {1.0, 0.0});
  CHECK(res.status == RefStatus::Infeasible);
}

TEST_CASE("reference QP: row cap") {
  Matrix q(1, 1);
  q(0, 0) = 1.0;
  Matrix m(21, 1);
  Vector lower(21, -1.0);
  for (std::size_t i = 0; i < 21; ++i) m(i, 0) = 1.0;
  CHECK_THROWS_AS(oracle::reference_qp_solve(q, {0.0}, m, lower),
                  OracleCapExceeded);
}

TEST_CASE("global enumeration on the axis pair") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();
  auto res = oracle::global_solve_by_enumeration(p);
  REQUIRE(res.feasible);
  CHECK(res.objective == doctest::Approx(-1.0).epsilon(1e-12));
  REQUIRE(res.reports.size() == 2);
  CHECK(res.reports[0].feasible);
  CHECK(res.reports[1].feasible);
  CHECK(res.reports[0].objective == doctest::Approx(-1.0));
  CHECK(res.reports[1].objective == doctest::Approx(-1.0));

  // Both branches tie at -1; the lexicographically first (left side pinned,
  // i.e. x1 = 0) wins, landing at (0, 1).
  REQUIRE(res.branch.size() == 1);
  CHECK(res.branch[0] == BranchSide::LeftZero);
  CHECK(res.x[0] == doctest::Approx(0.0));
  CHECK(res.x[1] == doctest::Approx(1.0));
}

TEST_CASE("global enumeration with a zero left row") {
  // Pair 0 <= 0 perp x >= 0 reduces to the sign constraint x >= 0: the
  // left-zero branch holds the true minimum.
  LcqpProblem p;
  p.Q = Matrix(1, 1);
  p.Q(0, 0) = 2.0;
  p.g = {-2.0};
  p.A = Matrix(0, 1);
  p.L = Matrix(1, 1);  // zero row
  p.R = Matrix(1, 1);
  p.R(0, 0) = 1.0;
  auto res = oracle::global_solve_by_enumeration(p);
  REQUIRE(res.feasible);
  CHECK(res.objective == doctest::Approx(-1.0));
  CHECK(res.x[0] == doctest::Approx(1.0));
  CHECK(res.branch[0] == BranchSide::LeftZero);
}

TEST_CASE("global enumeration detects infeasibility") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();
  p.A = Matrix(2, 2);
  p.A(0, 0) = 1.0;   // x1 >= 1
  p.A(1, 0) = -1.0;  // x1 <= 0
  p.b = {1.0, 0.0};
  auto res = oracle::global_solve_by_enumeration(p);
  CHECK_FALSE(res.feasible);
  for (const auto& rep : res.reports) CHECK_FALSE(rep.feasible);
}

TEST_CASE("global enumeration pair cap") {
  std::mt19937_64 gen(5);
  LcqpProblem p = lcqp::testing::random_lcqp(gen, 13, 0, 13);
  CHECK_THROWS_AS(oracle::global_solve_by_enumeration(p), OracleCapExceeded);
}

TEST_CASE("global optimum dominates feasible points") {
  std::mt19937_64 gen(42);
  for (int trial = 0; trial < 15; ++trial) {
    LcqpProblem p = lcqp::testing::random_lcqp(gen, 4, 1, 2);
    auto res = oracle::global_solve_by_enumeration(p);
    REQUIRE(res.feasible);  // origin is always feasible here
    CHECK(res.objective <= 0.0 + 1e-12);  // objective(0) = 0
    CHECK(lcqp::polyhedron_violation(p, res.x) <= 1e-8);
    CHECK(lcqp::complementarity_residual(p, res.x) <= 1e-8);
  }
}

TEST_CASE("grid line search on exact quadratics") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();

  // rho = 0: merit along x = alpha (1,1) is 2a^2 - 4a, minimized at a = 1.
  PenaltyContext ctx0 = make_penalty_context(p, 0.0);
  auto g0 = oracle::grid_line_search(p, ctx0, {0.0, 0.0}, {1.0, 1.0}, 1e-4);
  CHECK(g0.alpha == doctest::Approx(1.0));
  CHECK(g0.value == doctest::Approx(-2.0));

  // rho = 4: merit becomes 6a^2 - 4a, minimized at a = 1/3.
  PenaltyContext ctx4 = make_penalty_context(p, 4.0);
  auto g4 = oracle::grid_line_search(p, ctx4, {0.0, 0.0}, {1.0, 1.0}, 1e-6);
  CHECK(g4.alpha == doctest::Approx(1.0 / 3.0).epsilon(1e-5));
  CHECK(g4.value == doctest::Approx(-2.0 / 3.0).epsilon(1e-9));

  // Zero-length segment: flat scan keeps the smallest alpha.
  auto gz = oracle::grid_line_search(p, ctx4, {0.5, 0.25}, {0.5, 0.25}, 1e-2);
  CHECK(gz.alpha == 0.0);
}
