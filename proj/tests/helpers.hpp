#pragma once

#include <random>

#include "lcqp/problem.hpp"

// Shared fixtures and generators for the test suite.

namespace lcqp::testing {

inline double uniform(std::mt19937_64& gen, double lo, double hi) {
  const double u =
      static_cast<double>(gen() >> 11) * (1.0 / 9007199254740992.0);
  return lo + (hi - lo) * u;
}

// Two-variable problem with one complementarity pair on the coordinate axes:
// min x1^2 + x2^2 - 2 x1 - 2 x2  s.t.  0 <= x1 perp x2 >= 0.
// Global minima at (1,0) and (0,1) with objective -1; the origin satisfies
// only the weaker sign-indefinite stationarity conditions.
inline LcqpProblem axis_pair_problem() {
  LcqpProblem p;
  p.Q = Matrix(2, 2);
  p.Q(0, 0) = 2.0;
  p.Q(1, 1) = 2.0;
  p.g = {-2.0, -2.0};
  p.A = Matrix(0, 2);
  p.b = {};
  p.L = Matrix(1, 2);
  p.L(0, 0) = 1.0;
  p.R = Matrix(1, 2);
  p.R(0, 1) = 1.0;
  return p;
}

// Random instance that is always feasible at the origin: Q = B^T B + d I,
// general rows satisfied strictly at zero, arbitrary pair rows (both sides
// vanish at zero).
inline LcqpProblem random_lcqp(std::mt19937_64& gen, std::size_t n,
                               std::size_t n_general, std::size_t n_pairs,
                               bool with_box = false) {
  LcqpProblem p;
  Matrix B(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) B(i, j) = uniform(gen, -1.0, 1.0);
  p.Q = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += B(k, i) * B(k, j);
      p.Q(i, j) = s;
    }
  for (std::size_t i = 0; i < n; ++i) p.Q(i, i) += 0.5 + uniform(gen, 0.0, 1.0);

  p.g.resize(n);
  for (double& v : p.g) v = uniform(gen, -2.0, 2.0);

  p.A = Matrix(n_general, n);
  p.b.resize(n_general);
  for (std::size_t r = 0; r < n_general; ++r) {
    for (std::size_t j = 0; j < n; ++j) p.A(r, j) = uniform(gen, -1.0, 1.0);
    p.b[r] = -0.1 - uniform(gen, 0.0, 1.0);
  }

  p.L = Matrix(n_pairs, n);
  p.R = Matrix(n_pairs, n);
  for (std::size_t r = 0; r < n_pairs; ++r)
    for (std::size_t j = 0; j < n; ++j) {
      p.L(r, j) = uniform(gen, -1.0, 1.0);
      p.R(r, j) = uniform(gen, -1.0, 1.0);
    }

  if (with_box) {
    p.lb.resize(n);
    p.ub.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      p.lb[i] = -1.0 - uniform(gen, 0.0, 1.0);
      p.ub[i] = 1.0 + uniform(gen, 0.0, 1.0);
    }
  }
  return p;
}

// Plain strictly convex QP (no pairs) with rows feasible at the origin.
inline LcqpProblem random_qp(std::mt19937_64& gen, std::size_t n,
                             std::size_t n_general, bool with_box = false) {
  return random_lcqp(gen, n, n_general, 0, with_box);
}

}  // namespace lcqp::testing
