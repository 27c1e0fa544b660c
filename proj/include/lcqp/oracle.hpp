#pragma once

#include <vector>

#include "lcqp/problem.hpp"

// Brute-force reference implementations used to validate the fast path.
// Everything here favors transparency over speed: subset enumeration with a
// plain partial-pivoting elimination, no shared factorization machinery with
// the production solver.

namespace lcqp::oracle {

enum class RefStatus { Optimal, Infeasible };

struct RefQpResult {
  RefStatus status = RefStatus::Infeasible;
  Vector x;
  Vector y;  // one multiplier per row of M, zero off the active set
  double objective = 0.0;
  std::vector<int> active;  // row indices active at the solution
};

// Reference solver for  min 1/2 x^T Q x + c^T x  s.t.  M x >= lower,
// with rows listed in eq_rows pinned as equalities (sign-free multipliers).
// Enumerates candidate active subsets of size <= n and verifies the KKT
// conditions of each; exponential in the row count, capped at 20 rows
// (OracleCapExceeded beyond).
RefQpResult reference_qp_solve(const Matrix& q, const Vector& c,
                               const Matrix& m, const Vector& lower,
                               const std::vector<int>& eq_rows = {});

enum class BranchSide { LeftZero, RightZero };
using BranchAssignment = std::vector<BranchSide>;

struct BranchReport {
  BranchAssignment branch;
  bool feasible = false;
  Vector x;
  double objective = 0.0;
};

struct GlobalResult {
  bool feasible = false;
  Vector x;
  double objective = 0.0;
  BranchAssignment branch;  // lexicographically first among optimal branches
  std::vector<BranchReport> reports;
};

// Global minimum by enumerating all 2^{n_C} complementarity branches; each
// branch pins one side of every pair to zero and solves the resulting convex
// QP with the reference solver. Branches are visited in lexicographic order
// (LeftZero < RightZero) and ties keep the earlier branch, so the result is
// deterministic. Capped at n_C <= 12 pairs.
GlobalResult global_solve_by_enumeration(const LcqpProblem& p);

struct GridSearchResult {
  double alpha = 0.0;
  double value = 0.0;
};

// Dense scan of the merit function along the segment x + alpha (x_star - x),
// alpha in [0, 1], at the given resolution. Ties keep the smallest alpha.
GridSearchResult grid_line_search(const LcqpProblem& p, const PenaltyContext& ctx,
                                  const Vector& x, const Vector& x_star,
                                  double resolution);

}  // namespace lcqp::oracle
