#pragma once

#include <vector>

#include "lcqp/problem.hpp"

namespace lcqp {

enum class RowKind { General, CompLeft, CompRight, BoxLower, BoxUpper };

struct RowOrigin {
  RowKind kind = RowKind::General;
  int index = 0;  // constraint row, complementarity pair, or variable
};

// All polyhedron rows of an LCQP stacked as one-sided inequalities
// M x >= lower, ordered [A; L; R; finite lb; finite ub]. Upper box bounds
// are stored as negated rows.
struct StackedConstraints {
  Matrix M;
  Vector lower;
  std::vector<RowOrigin> origin;
  std::size_t left_offset = 0;   // first L row
  std::size_t right_offset = 0;  // first R row
  std::size_t box_offset = 0;    // first box row
};

StackedConstraints build_stacked(const LcqpProblem& p);

enum class QpStatus { Optimal, Infeasible, IterationLimit };

struct QpSolveInfo {
  QpStatus status = QpStatus::Optimal;
  long changes = 0;      // working-set changes during this call
  long refinements = 0;  // refinement passes during this call
};

// Strictly convex QP solver over a fixed polyhedron, built for sequences of
// related gradients. The Hessian is factorized exactly once per workspace;
// every solve continues a parametric path in (c, lower) from the previous
// certified solution, updating a Schur-complement factorization of the
// working-set rows as constraints enter and leave. The first call starts
// from a relaxed bound vector chosen so the base point is optimal, which
// makes phase 1 and infeasibility detection part of the same path.
class QpWorkspace {
 public:
  // Factorizes Q (the workspace's only full factorization) and prepares the
  // cold-start state at x_hint clamped into the box bounds (zero by default).
  explicit QpWorkspace(const LcqpProblem& p, const Vector& x_hint = {});

  // Minimizes 1/2 x^T Q x + c^T x over the stacked rows. Calling again with
  // an unchanged c returns immediately with zero working-set changes.
  QpSolveInfo solve(const Vector& c);

  const Vector& primal() const { return x_; }
  // Stacked multipliers; zero off the working set, nonnegative on it.
  const Vector& dual() const { return y_; }
  const StackedConstraints& stacked() const { return sc_; }
  const std::vector<int>& working_set() const { return w_; }

  long factorization_count() const { return factorization_count_; }
  long refinement_count() const { return refinement_count_; }
  long active_set_changes() const { return active_set_changes_; }

  // Max norm over stationarity, primal/dual feasibility and complementary
  // slackness of the current iterate for gradient c.
  double kkt_residual(const Vector& c) const;

 private:
  enum class AddOutcome { Added, Skipped, Failed };

  void reanchor();
  void compute_residual(const Vector& lower_ref, Vector& out) const;
  void make_w_row(int row, Vector& w_out) const;
  AddOutcome try_add(int row, long& iter_budget, QpStatus& status);
  void remove_slot(std::size_t slot);
  void polish();
  void refine_once();
  QpStatus run_path(const Vector& c_target, long& iter_budget);

  std::size_t n_ = 0;
  std::size_t m_ = 0;
  Matrix q_;
  Cholesky chol_;
  StackedConstraints sc_;
  Vector row_scale_;  // per-row inf norm of M

  Vector x_;
  Vector y_;
  std::vector<int> w_;      // working-set rows in factor slot order
  std::vector<char> in_w_;
  Matrix wfac_;             // slot s holds L^{-1} M_{w_s}^T
  GramCholesky gram_;       // factor of wfac wfac^T

  Vector c_cur_;      // parameters the current state is optimal for
  Vector lower_cur_;

  long factorization_count_ = 0;
  long refinement_count_ = 0;
  long active_set_changes_ = 0;

  // scratch
  Vector tmp_n_, tmp_n2_, tmp_m_, tmp_k_, resid_, dx_, mdx_, dyw_, wrow_;
};

}  // namespace lcqp
