#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <random>

#include "doctest.h"
#include "helpers.hpp"
#include "lcqp/oracle.hpp"
#include "lcqp/qpsolver.hpp"

using namespace lcqp;

TEST_CASE("stacked constraints: order, offsets and origins") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();
  p.A = Matrix(1, 2);
  p.A(0, 0) = 1.0;
  p.A(0, 1) = 1.0;
  p.b = {-5.0};
  p.lb = {0.25, -std::numeric_limits<double>::infinity()};
  p.ub = {std::numeric_limits<double>::infinity(), 3.0};

  StackedConstraints sc = build_stacked(p);
  REQUIRE(sc.M.rows() == 5);  // A, L, R, one finite lb, one finite ub
  CHECK(sc.left_offset == 1);
  CHECK(sc.right_offset == 2);
  CHECK(sc.box_offset == 3);

  CHECK(sc.origin[0].kind == RowKind::General);
  CHECK(sc.origin[1].kind == RowKind::CompLeft);
  CHECK(sc.origin[2].kind == RowKind::CompRight);
  CHECK(sc.origin[3].kind == RowKind::BoxLower);
  CHECK(sc.origin[3].index == 0);
  CHECK(sc.origin[4].kind == RowKind::BoxUpper);
  CHECK(sc.origin[4].index == 1);

  CHECK(sc.lower[0] == -5.0);
  CHECK(sc.lower[1] == 0.0);
  CHECK(sc.lower[3] == 0.25);
  // Upper bound x2 <= 3 is stored negated: -x2 >= -3.
  CHECK(sc.M(4, 1) == -1.0);
  CHECK(sc.lower[4] == -3.0);
}

TEST_CASE("axis-pair polyhedron: interior and corner solves") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();
  QpWorkspace ws(p);
  CHECK(ws.factorization_count() == 1);

  // c = g: the unconstrained minimizer (1,1) is feasible.
  QpSolveInfo info = ws.solve(p.g);
  REQUIRE(info.status == QpStatus::Optimal);
  CHECK(ws.primal()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(ws.primal()[1] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(norm_inf(ws.dual()) <= 1e-10);
  CHECK(ws.kkt_residual(p.g) <= 1e-9);

  // Re-solving the identical gradient is a no-op.
  info = ws.solve(p.g);
  CHECK(info.status == QpStatus::Optimal);
  CHECK(info.changes == 0);
  CHECK(ws.factorization_count() == 1);

  // c = (-2, 2): pushed onto the x2 = 0 face, multiplier 2 on the R row.
  Vector c1 = {-2.0, 2.0};
  info = ws.solve(c1);
  REQUIRE(info.status == QpStatus::Optimal);
  CHECK(ws.primal()[0] == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(ws.primal()[1]) <= 1e-12);
  CHECK(ws.dual()[1] == doctest::Approx(2.0).epsilon(1e-10));
  CHECK(ws.kkt_residual(c1) <= 1e-9);

  // Warm start on the same gradient: zero changes again.
  info = ws.solve(c1);
  CHECK(info.changes == 0);

  // Mirror gradient moves to the other face.
  Vector c2 = {2.0, -2.0};
  info = ws.solve(c2);
  REQUIRE(info.status == QpStatus::Optimal);
  CHECK(std::fabs(ws.primal()[0]) <= 1e-12);
  CHECK(ws.primal()[1] == doctest::Approx(1.0).epsilon(1e-12));

  CHECK(ws.factorization_count() == 1);
}

TEST_CASE("infeasible polyhedron is detected") {
  LcqpProblem p;
  p.Q = Matrix(1, 1);
  p.Q(0, 0) = 2.0;
  p.g = {0.0};
  p.A = Matrix(2, 1);
  p.A(0, 0) = 1.0;   // x >= 1
  p.A(1, 0) = -1.0;  // x <= 0
  p.b = {1.0, 0.0};
  p.L = Matrix(0, 1);
  p.R = Matrix(0, 1);

  QpWorkspace ws(p);
  QpSolveInfo info = ws.solve(p.g);
  CHECK(info.status == QpStatus::Infeasible);
}

TEST_CASE("indefinite Hessian is rejected at construction") {
  LcqpProblem p = lcqp::testing::axis_pair_problem();
  p.Q(0, 1) = p.Q(1, 0) = 3.0;
  CHECK_THROWS_AS(QpWorkspace{p}, IndefiniteHessian);
}

TEST_CASE("random QPs match the reference solver") {
  std::mt19937_64 gen(314159);
  int optimal_seen = 0;
  for (int trial = 0; trial < 120; ++trial) {
    const std::size_t n = 2 + static_cast<std::size_t>(trial % 3);
    const std::size_t n_general = static_cast<std::size_t>(trial % 4);
    const bool with_box = trial % 3 == 0;
    LcqpProblem p = lcqp::testing::random_qp(gen, n, n_general, with_box);

    QpWorkspace ws(p);
    StackedConstraints sc = build_stacked(p);

    // A short sequence of gradients exercises warm starts along the way.
    for (int step = 0; step < 3; ++step) {
      Vector c(n);
      for (double& v : c) v = lcqp::testing::uniform(gen, -4.0, 4.0);

      QpSolveInfo info = ws.solve(c);
      auto ref = oracle::reference_qp_solve(p.Q, c, sc.M, sc.lower);

      if (ref.status == oracle::RefStatus::Optimal) {
        REQUIRE(info.status == QpStatus::Optimal);
        ++optimal_seen;
        for (std::size_t i = 0; i < n; ++i)
          CHECK(std::fabs(ws.primal()[i] - ref.x[i]) <= 1e-8);

        // Multiplier signs and stationarity.
        Vector resid;
        matvec(sc.M, ws.primal(), resid);
        for (std::size_t r = 0; r < sc.M.rows(); ++r) {
          CHECK(ws.dual()[r] >= -1e-9);
          CHECK(resid[r] >= sc.lower[r] - 1e-9);
        }
        CHECK(ws.kkt_residual(c) <= 1e-8);
      } else {
        CHECK(info.status == QpStatus::Infeasible);
      }
    }
    CHECK(ws.factorization_count() == 1);
  }
  CHECK(optimal_seen > 300);  // origin-feasible instances: all solvable
}

TEST_CASE("two workspaces on one problem are independent") {
  std::mt19937_64 gen(77);
  LcqpProblem p = lcqp::testing::random_qp(gen, 3, 2);
  StackedConstraints sc = build_stacked(p);

  QpWorkspace a(p), b(p);
  CHECK(a.factorization_count() == 1);
  CHECK(b.factorization_count() == 1);

  Vector c1 = {1.0, -2.0, 0.5};
  Vector c2 = {-3.0, 0.5, 1.5};

  REQUIRE(a.solve(c1).status == QpStatus::Optimal);
  REQUIRE(b.solve(c2).status == QpStatus::Optimal);
  // Interleave more solves; each workspace must stay consistent.
  REQUIRE(a.solve(c2).status == QpStatus::Optimal);
  REQUIRE(b.solve(c1).status == QpStatus::Optimal);

  auto r1 = oracle::reference_qp_solve(p.Q, c2, sc.M, sc.lower);
  auto r2 = oracle::reference_qp_solve(p.Q, c1, sc.M, sc.lower);
  REQUIRE(r1.status == oracle::RefStatus::Optimal);
  REQUIRE(r2.status == oracle::RefStatus::Optimal);
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::fabs(a.primal()[i] - r1.x[i]) <= 1e-8);
    CHECK(std::fabs(b.primal()[i] - r2.x[i]) <= 1e-8);
  }
  CHECK(a.factorization_count() == 1);
  CHECK(b.factorization_count() == 1);
}

TEST_CASE("degenerate corner: more active rows than dimensions") {
  // Three rows meet at the origin of a 2-D problem; the tie-banded
  // least-index rule must terminate and pick a valid vertex.
  LcqpProblem p;
  p.Q = Matrix::identity(2);
  p.Q(0, 0) = p.Q(1, 1) = 2.0;
  p.g = {1.0, 1.0};  // pushes toward the corner
  p.A = Matrix(3, 2);
  p.A(0, 0) = 1.0;  // x1 >= 0
  p.A(1, 1) = 1.0;  // x2 >= 0
  p.A(2, 0) = 1.0;
  p.A(2, 1) = 1.0;  // x1 + x2 >= 0 (redundant at the corner)
  p.b = {0.0, 0.0, 0.0};
  p.L = Matrix(0, 2);
  p.R = Matrix(0, 2);

  QpWorkspace ws(p);
  QpSolveInfo info = ws.solve(p.g);
  REQUIRE(info.status == QpStatus::Optimal);
  CHECK(std::fabs(ws.primal()[0]) <= 1e-12);
  CHECK(std::fabs(ws.primal()[1]) <= 1e-12);
  CHECK(ws.kkt_residual(p.g) <= 1e-9);
}

TEST_CASE("equality-like paired rows") {
  // x1 >= 1 and -x1 >= -1 force x1 = 1 exactly.
  LcqpProblem p;
  p.Q = Matrix::identity(2);
  p.Q(0, 0) = p.Q(1, 1) = 2.0;
  p.g = {0.0, -2.0};
  p.A = Matrix(2, 2);
  p.A(0, 0) = 1.0;
  p.A(1, 0) = -1.0;
  p.b = {1.0, -1.0};
  p.L = Matrix(0, 2);
  p.R = Matrix(0, 2);

  QpWorkspace ws(p);
  QpSolveInfo info = ws.solve(p.g);
  REQUIRE(info.status == QpStatus::Optimal);
  CHECK(ws.primal()[0] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ws.primal()[1] == doctest::Approx(1.0).epsilon(1e-10));
  CHECK(ws.kkt_residual(p.g) <= 1e-9);
}
