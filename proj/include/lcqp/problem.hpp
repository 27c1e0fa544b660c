#pragma once

#include <string>

#include "lcqp/errors.hpp"
#include "lcqp/linalg.hpp"

namespace lcqp {

// Quadratic program with linear complementarity constraints:
//
//   minimize    1/2 x^T Q x + g^T x
//   subject to  A x >= b
//               0 <= L x  perp  R x >= 0
//               lb <= x <= ub          (optional)
//
// Q is symmetric positive definite; L and R have one row per
// complementarity pair.
struct LcqpProblem {
  Matrix Q;
  Vector g;
  Matrix A;
  Vector b;
  Matrix L;
  Matrix R;
  Vector lb;  // empty when absent; entries may be -inf
  Vector ub;  // empty when absent; entries may be +inf
  Vector x0;  // optional initial guess

  std::size_t n() const { return g.size(); }
  std::size_t n_general() const { return A.rows(); }
  std::size_t n_pairs() const { return L.rows(); }
};

// Symmetrized penalty data: C = L^T R + R^T L, so that the complementarity
// penalty phi(x) = (Lx)^T (Rx) equals 1/2 x^T C x. C is indefinite whenever
// it is nonzero (its trace-free structure pairs every positive eigenvalue
// with a negative one in the generic case).
struct PenaltyContext {
  Matrix C;
  double rho = 0.0;
};

// Throws DimensionMismatch / NonSymmetricHessian / IndefiniteHessian /
// InvalidValue, naming the offending field.
void validate(const LcqpProblem& p);

double objective(const LcqpProblem& p, const Vector& x);

// phi(x) = (Lx)^T (Rx); nonnegative on the feasible set.
double complementarity_residual(const LcqpProblem& p, const Vector& x);

PenaltyContext make_penalty_context(const LcqpProblem& p, double rho);

// Penalized merit 1/2 x^T (Q + rho C) x + g^T x.
double merit(const LcqpProblem& p, const PenaltyContext& ctx, const Vector& x);

// Largest violation of A x >= b, L x >= 0, R x >= 0 and the box bounds;
// zero at feasible points (complementarity itself is not included).
double polyhedron_violation(const LcqpProblem& p, const Vector& x);

// JSON problem files. Matrices are stored dense (array of row arrays) or in
// coordinate form {"shape": [r, c], "rows": [...], "cols": [...],
// "vals": [...]}; both are accepted on load, dense is written on save.
// Doubles are written with 17 significant digits so files round-trip
// bit-exactly. Infinite bound entries are written as null.
LcqpProblem load_problem(const std::string& path);
void save_problem(const LcqpProblem& p, const std::string& path);

}  // namespace lcqp
