#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>

#include "doctest.h"
#include "lcqp/solver.hpp"
#include "lcqp/transcription.hpp"

using namespace lcqp;

TEST_CASE("config validation") {
  IvocpConfig cfg;
  CHECK_NOTHROW(validate(cfg));
  cfg.N = 0;
  CHECK_THROWS_AS(validate(cfg), InvalidValue);
  cfg = {};
  cfg.regularization_eps = 0.0;
  CHECK_THROWS_AS(validate(cfg), InvalidValue);
  cfg.regularization_eps = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(validate(cfg), InvalidValue);
}

TEST_CASE("two-step discretization has the documented structure") {
  IvocpConfig cfg;
  cfg.N = 2;
  IvocpProblem built = build_ivocp(cfg);
  const LcqpProblem& p = built.problem;
  const IvocpIndexMap& ix = built.map;
  const double eps = cfg.regularization_eps;

  CHECK(built.h == 1.0);
  CHECK(p.n() == 9);
  CHECK(p.n_general() == 8);
  CHECK(p.n_pairs() == 4);
  CHECK_NOTHROW(validate(p));

  // Index layout: states, then switch fractions, negative parts, complements.
  CHECK(ix.state(0) == 0);
  CHECK(ix.state(2) == 2);
  CHECK(ix.switch_frac(1) == 3);
  CHECK(ix.neg_part(1) == 5);
  CHECK(ix.complement(2) == 8);
  CHECK(ix.size() == 9);

  // Cost: squared state weighted by the step, terminal pull toward 5/3,
  // epsilon elsewhere.
  CHECK(p.Q(0, 0) == eps);
  CHECK(p.Q(1, 1) == 2.0);      // 2h
  CHECK(p.Q(2, 2) == 4.0);      // 2h + 2
  CHECK(p.Q(3, 3) == eps);
  CHECK(p.Q(5, 5) == eps);
  CHECK(p.g[2] == doctest::Approx(-10.0 / 3.0).epsilon(1e-15));
  CHECK(p.g[0] == 0.0);

  // First dynamics row pair: x_0 - x_1 - 2h y_1 >= -3h and its negation.
  CHECK(p.A(0, ix.state(0)) == 1.0);
  CHECK(p.A(0, ix.state(1)) == -1.0);
  CHECK(p.A(0, ix.switch_frac(1)) == -2.0);
  CHECK(p.b[0] == -3.0);
  CHECK(p.A(1, ix.state(0)) == -1.0);
  CHECK(p.b[1] == 3.0);

  // First slack row pair: y_1 + s_1 = 1.
  CHECK(p.A(4, ix.switch_frac(1)) == 1.0);
  CHECK(p.A(4, ix.complement(1)) == 1.0);
  CHECK(p.b[4] == 1.0);
  CHECK(p.b[5] == -1.0);

  // Pair rows for step 1: (x_1 + lam_1) perp s_1 and lam_1 perp y_1.
  CHECK(p.L(0, ix.state(1)) == 1.0);
  CHECK(p.L(0, ix.neg_part(1)) == 1.0);
  CHECK(p.R(0, ix.complement(1)) == 1.0);
  CHECK(p.L(1, ix.neg_part(1)) == 1.0);
  CHECK(p.R(1, ix.switch_frac(1)) == 1.0);
}

TEST_CASE("forward simulation above zero keeps slope one") {
  IvocpConfig cfg;
  cfg.N = 4;
  Vector v = forward_simulate(cfg, 1.0);
  IvocpIndexMap ix{4};
  CHECK(v[ix.state(0)] == 1.0);
  CHECK(v[ix.state(4)] == doctest::Approx(3.0).epsilon(1e-14));
  for (int k = 1; k <= 4; ++k) {
    CHECK(v[ix.switch_frac(k)] == 1.0);
    CHECK(v[ix.neg_part(k)] == 0.0);
    CHECK(v[ix.complement(k)] == 0.0);
  }
}

TEST_CASE("forward simulation crosses zero with a fractional step") {
  IvocpConfig cfg;
  cfg.N = 4;  // h = 0.5
  Vector v = forward_simulate(cfg, -4.0);
  IvocpIndexMap ix{4};
  CHECK(v[ix.state(1)] == doctest::Approx(-2.5).epsilon(1e-14));
  CHECK(v[ix.neg_part(1)] == doctest::Approx(2.5).epsilon(1e-14));
  CHECK(v[ix.switch_frac(1)] == 0.0);
  CHECK(v[ix.state(2)] == doctest::Approx(-1.0).epsilon(1e-14));
  // Step 3 crosses: the state pins to zero and the switch takes the exact
  // fractional value solving the implicit update.
  CHECK(v[ix.state(3)] == 0.0);
  CHECK(v[ix.switch_frac(3)] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(v[ix.neg_part(3)] == 0.0);
  CHECK(v[ix.state(4)] == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(v[ix.switch_frac(4)] == 1.0);
}

TEST_CASE("forward simulation is feasible and complementarity-consistent") {
  IvocpConfig cfg;
  cfg.N = 5;
  IvocpProblem built = build_ivocp(cfg);
  for (double x0 : {-2.0, -1.3, -0.4, 0.0, 0.7, 1.9}) {
    Vector v = forward_simulate(cfg, x0);
    CHECK(polyhedron_violation(built.problem, v) <= 1e-12);
    CHECK(complementarity_residual(built.problem, v) <= 1e-12);
    CHECK(extract_x0(v, built.map) == x0);
  }
}

TEST_CASE("analytic trajectory fixtures") {
  AnalyticTrajectory t0 = analytic_trajectory(0.0);
  CHECK(t0.switch_time == -1.0);
  CHECK(t0.objective == doctest::Approx(8.0 / 3.0 + 1.0 / 9.0).epsilon(1e-14));

  AnalyticTrajectory t3 = analytic_trajectory(-3.0);
  CHECK(t3.switch_time == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(t3.objective ==
        doctest::Approx(3.0 + 1.0 / 3.0 + 4.0 / 9.0).epsilon(1e-14));

  // Never reaches zero within the horizon.
  AnalyticTrajectory t6 = analytic_trajectory(-6.0);
  CHECK(t6.switch_time == -1.0);
  CHECK(t6.objective == doctest::Approx(24.0 + 25.0 / 9.0).epsilon(1e-14));

  AnalyticTrajectory tc = analytic_trajectory(-1.5);
  CHECK(tc.switch_time == doctest::Approx(0.5).epsilon(1e-14));
  CHECK(tc.state_at(0.25) == doctest::Approx(-0.75).epsilon(1e-14));
  CHECK(tc.state_at(0.5) == doctest::Approx(0.0).epsilon(1e-14));
  CHECK(tc.state_at(1.5) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("analytic optimal initial state") {
  const double x0 = analytic_optimal_x0();
  CHECK(x0 == doctest::Approx((9.0 - std::sqrt(417.0)) / 8.0).epsilon(1e-10));
  // Local minimality against nearby evaluations.
  const double j = analytic_trajectory(x0).objective;
  CHECK(analytic_trajectory(x0 - 1e-4).objective >= j - 1e-12);
  CHECK(analytic_trajectory(x0 + 1e-4).objective >= j - 1e-12);
}

TEST_CASE("extract_x0 rejects mismatched vectors") {
  IvocpIndexMap ix{3};
  Vector wrong(7, 0.0);
  CHECK_THROWS_AS(extract_x0(wrong, ix), IndexMapMismatch);
}

TEST_CASE("solved sixteen-step instance recovers the optimal policy") {
  IvocpConfig cfg;
  cfg.N = 16;
  IvocpProblem built = build_ivocp(cfg);
  built.problem.x0 = forward_simulate(cfg, -1.0);

  SolverResult res = solve(built.problem);
  REQUIRE(res.status == SolveStatus::StationaryPoint);
  CHECK(res.phi <= 1e-10);
  CHECK(res.factorization_count == 1);

  const double x0 = extract_x0(res.x, built.map);
  CHECK(std::fabs(x0 - analytic_optimal_x0()) <= 0.25);

  // Dynamics hold exactly along the solution.
  const IvocpIndexMap& ix = built.map;
  for (int k = 1; k <= cfg.N; ++k) {
    const double lhs = res.x[ix.state(k)];
    const double rhs = res.x[ix.state(k - 1)] +
                       built.h * (3.0 - 2.0 * res.x[ix.switch_frac(k)]);
    CHECK(std::fabs(lhs - rhs) <= 1e-8);
    const double yk = res.x[ix.switch_frac(k)];
    const double sk = res.x[ix.complement(k)];
    CHECK(std::fabs(yk + sk - 1.0) <= 1e-8);
  }

  // Switch variables follow the sign of the state away from the crossing.
  for (int k = 1; k <= cfg.N; ++k) {
    const double xk = res.x[ix.state(k)];
    const double yk = res.x[ix.switch_frac(k)];
    const double lk = res.x[ix.neg_part(k)];
    if (xk < -1e-3) {
      CHECK(std::fabs(yk) <= 1e-5);
      CHECK(std::fabs(lk + xk) <= 1e-5);
    } else if (xk > 1e-3) {
      CHECK(std::fabs(yk - 1.0) <= 1e-5);
      CHECK(std::fabs(lk) <= 1e-5);
    }
  }
}

TEST_CASE("relaxed start still reaches a complementary point") {
  IvocpConfig cfg;
  cfg.N = 8;
  IvocpProblem built = build_ivocp(cfg);
  SolverOptions opts;
  opts.init_mode = InitMode::ZeroPenaltyQp;
  SolverResult res = solve(built.problem, opts);
  REQUIRE(res.status == SolveStatus::StationaryPoint);
  CHECK(res.phi <= 1e-8);
  CHECK(std::fabs(extract_x0(res.x, built.map) - analytic_optimal_x0()) <= 0.5);
}

TEST_CASE("refining the grid improves the recovered initial state") {
  double previous = std::numeric_limits<double>::infinity();
  for (int N : {8, 16, 32}) {
    IvocpConfig cfg;
    cfg.N = N;
    IvocpProblem built = build_ivocp(cfg);
    built.problem.x0 = forward_simulate(cfg, -1.0);
    SolverResult res = solve(built.problem);
    REQUIRE(res.status == SolveStatus::StationaryPoint);
    const double err = std::fabs(extract_x0(res.x, built.map) - analytic_optimal_x0());
    CHECK(err <= 1.2 * previous + 1e-6);
    CHECK(err <= 0.5);
    previous = err;
  }
}
