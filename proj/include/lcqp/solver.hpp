#pragma once

#include <optional>
#include <string>
#include <vector>

#include "lcqp/problem.hpp"
#include "lcqp/qpsolver.hpp"

namespace lcqp {

enum class InitMode {
  ZeroPenaltyQp,  // start from the penalized QP solution with zero penalty
                  // gradient contribution
  GivenX0,        // start from x0, projected onto the polyhedron in the
                  // Q-norm if needed
};

struct SolverOptions {
  double rho0 = 0.01;
  double beta = 2.0;
  double tol_stationarity = 1e-8;
  double tol_complementarity = 1e-10;
  double rho_max = 1e8;
  int max_inner = 500;  // per penalty stage
  // Default picks GivenX0 exactly when the problem carries an x0.
  std::optional<InitMode> init_mode;
  double activity_tol = 1e-6;
  // Record how far an extra QP re-solve moves each converged iterate
  // (diagnostic; adds one QP solve per penalty stage).
  bool resolve_probe = false;
};

// Throws InvalidValue on inconsistent settings.
void validate(const SolverOptions& o);

struct TraceRecord {
  int outer = 0;  // penalty stage, rho = rho0 * beta^outer
  int inner = 0;  // iteration within the stage, 1-based
  double rho = 0.0;
  double alpha = 0.0;
  double merit_value = 0.0;   // after the step
  double stationarity = 0.0;  // residual that triggered the iteration
  double phi = 0.0;           // complementarity penalty after the step
  double descent = 0.0;       // directional derivative of the merit at alpha=0
  double step_norm = 0.0;     // inf-norm of the full step x* - x
  long qp_changes = 0;
};

struct SolveTrace {
  std::vector<TraceRecord> records;
  // Filled when SolverOptions::resolve_probe is set: per converged stage,
  // the distance an extra QP re-solve moves the iterate, and the
  // stationarity residual against the re-solve's multipliers.
  std::vector<double> probe_move;
  std::vector<double> probe_stationarity;
};

enum class SolveStatus { StationaryPoint, PenaltyLimit, IterationLimit, Infeasible };

const char* to_string(SolveStatus s);

struct CertificateReport {
  bool holds = false;
  double max_violation = 0.0;
  std::vector<std::string> violations;
  std::vector<int> active_left;     // pairs with (Lx)_i within activity_tol
  std::vector<int> active_right;    // pairs with (Rx)_i within activity_tol
  std::vector<int> weakly_active;   // both sides within activity_tol
  double activity_tol = 0.0;
};

struct SolverResult {
  SolveStatus status = SolveStatus::IterationLimit;
  Vector x;
  // Stacked multipliers at the complementarity-problem level: on pair rows
  // the penalty contribution is folded out of the QP multipliers, so
  // strongly active sides may carry either sign.
  Vector y;
  Vector y_general, y_left, y_right, y_box;  // split by row origin
  double objective = 0.0;
  double phi = 0.0;
  double stationarity = 0.0;
  double final_rho = 0.0;
  int outer_iterations = 0;
  long inner_iterations = 0;
  long factorization_count = 0;
  long refinement_count = 0;
  long active_set_changes = 0;
  CertificateReport certificate;
  SolveTrace trace;
};

struct StepLength {
  double alpha = 0.0;
  double gamma = 0.0;      // p^T Q p
  double delta = 0.0;      // rho p^T C p
  double curvature = 0.0;  // gamma + delta
  double descent = 0.0;    // x^T (Q + rho C) p + g^T p
  double step_norm = 0.0;  // inf-norm of p = x_star - x
};

// Closed-form minimizer of the merit restricted to the segment
// [x, x_star]: alpha = 1 when the penalty curvature is nonpositive,
// otherwise -descent/curvature clamped to [0, 1]; zero for a negligible
// step.
StepLength optimal_step_length(const LcqpProblem& p, const PenaltyContext& ctx,
                               const Vector& x, const Vector& x_star);

// Inf-norm KKT residual of the penalized QP at (x, y) over the stacked
// rows: stationarity, primal and dual feasibility, complementary slackness.
double stationarity_residual(const LcqpProblem& p, const PenaltyContext& ctx,
                             const StackedConstraints& sc, const Vector& x,
                             const Vector& y);
double stationarity_residual(const LcqpProblem& p, const PenaltyContext& ctx,
                             const Vector& x, const Vector& y);

// Checks the sign-structured multiplier conditions at x against the stacked
// multipliers y: zero multipliers on inactive sides, free sign on strongly
// active sides, nonnegative on weakly active pairs and on general/box rows.
// Throws NotFeasible when x violates the polyhedron beyond tolerance.
CertificateReport check_strong_stationarity(const LcqpProblem& p, const Vector& x,
                                            const Vector& y,
                                            double activity_tol = 1e-6);

// Penalty homotopy with sequential convex inner iterations and exact line
// search. The inner QP workspace is created once; its factorization count
// is reported in the result.
SolverResult solve(const LcqpProblem& p, const SolverOptions& opts = {});

}  // namespace lcqp
