#pragma once

#include "lcqp/problem.hpp"

// Discretization of a two-second integrator that crosses a sign-dependent
// speed switch: the state rises with slope 3 below zero and slope 1 above,
// the running cost is the squared state, and the terminal cost pulls the
// state toward 5/3. The sign logic becomes complementarity pairs on a
// switch fraction per step, so the discretized problem lands exactly in the
// solver's problem class.

namespace lcqp {

struct IvocpConfig {
  int N = 50;                        // implicit Euler steps over [0, 2]
  double regularization_eps = 1e-6;  // diagonal regularization keeping Q
                                     // positive definite on the variables
                                     // the cost does not touch
};

// Throws InvalidValue on a nonpositive step count or regularization.
void validate(const IvocpConfig& cfg);

// Variable layout: states x_0..x_N first, then blockwise for k = 1..N the
// switch fractions y_k, the negative parts lam_k, and the switch
// complements s_k = 1 - y_k. Total 4N + 1 variables.
struct IvocpIndexMap {
  int N = 0;

  std::size_t state(int k) const { return static_cast<std::size_t>(k); }
  std::size_t switch_frac(int k) const {
    return static_cast<std::size_t>(N + k);
  }
  std::size_t neg_part(int k) const {
    return static_cast<std::size_t>(2 * N + k);
  }
  std::size_t complement(int k) const {
    return static_cast<std::size_t>(3 * N + k);
  }
  std::size_t size() const { return static_cast<std::size_t>(4 * N + 1); }
};

struct IvocpProblem {
  LcqpProblem problem;
  IvocpIndexMap map;
  double h = 0.0;  // step length 2/N
};

// Builds the discretized problem: per step, the implicit Euler dynamics
// x_k = x_{k-1} + h (3 - 2 y_k) and the slack identity y_k + s_k = 1 enter
// as paired one-sided rows of A, and the sign logic enters as the pairs
// 0 <= x_k + lam_k  perp  s_k >= 0 and 0 <= lam_k  perp  y_k >= 0.
IvocpProblem build_ivocp(const IvocpConfig& cfg);

struct AnalyticTrajectory {
  double x0 = 0.0;
  double switch_time = -1.0;  // crossing time in (0, 2), -1 when none
  double objective = 0.0;

  double state_at(double t) const;
};

// Exact continuous-time trajectory and cost for a given initial state.
AnalyticTrajectory analytic_trajectory(double x0);

// Minimizer of the continuous-time cost over the initial state,
// (9 - sqrt(417)) / 8; located numerically and cached.
double analytic_optimal_x0();

// First state entry of a solution vector; throws IndexMapMismatch when the
// vector does not match the layout.
double extract_x0(const Vector& x, const IvocpIndexMap& map);

// Feasible, complementarity-consistent full variable vector obtained by
// simulating the implicit discretization forward from x0.
Vector forward_simulate(const IvocpConfig& cfg, double x0);

}  // namespace lcqp
