#include "lcqp/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace lcqp {
namespace {

SolveStatus map_qp_failure(QpStatus st) {
  return st == QpStatus::Infeasible ? SolveStatus::Infeasible
                                    : SolveStatus::IterationLimit;
}

// Folds the penalty gradient out of the QP multipliers on pair rows:
// (Q + rho C)x + g = M^T y_qp rearranges to Qx + g = M^T y with
// y_left -= rho (Rx) and y_right -= rho (Lx).
Vector fold_penalty_duals(const Vector& y_qp, const StackedConstraints& sc,
                          const Vector& mx, double rho) {
  Vector y = y_qp;
  const std::size_t nc = sc.right_offset - sc.left_offset;
  for (std::size_t i = 0; i < nc; ++i) {
    y[sc.left_offset + i] -= rho * mx[sc.right_offset + i];
    y[sc.right_offset + i] -= rho * mx[sc.left_offset + i];
  }
  return y;
}

CertificateReport certify(const LcqpProblem& p, const StackedConstraints& sc,
                          const Vector& x, const Vector& y,
                          double activity_tol) {
  CertificateReport rep;
  rep.activity_tol = activity_tol;
  const double y_norm = norm_inf(y);
  const double zero_tol = 1e-8 * (1.0 + y_norm);

  const auto violation = [&rep](double excess, std::string msg) {
    rep.max_violation = std::max(rep.max_violation, excess);
    rep.violations.push_back(std::move(msg));
  };

  // Gradient condition: Qx + g = M^T y.
  Vector grad;
  matvec(p.Q, x, grad);
  axpy(1.0, p.g, grad);
  Vector mty;
  matvec_transpose(sc.M, y, mty);
  axpy(-1.0, mty, grad);
  const double grad_err = norm_inf(grad);
  const double grad_tol = 1e-8 * (1.0 + y_norm + norm_inf(p.g));
  if (grad_err > grad_tol) {
    violation(grad_err, "gradient condition fails by " + std::to_string(grad_err));
  }

  Vector mx;
  matvec(sc.M, x, mx);
  const std::size_t nc = sc.right_offset - sc.left_offset;

  for (std::size_t r = 0; r < sc.M.rows(); ++r) {
    const RowKind kind = sc.origin[r].kind;
    if (kind == RowKind::CompLeft || kind == RowKind::CompRight) continue;
    const double resid = mx[r] - sc.lower[r];
    if (y[r] < -zero_tol) {
      violation(-y[r], "row " + std::to_string(r) + ": negative multiplier");
    }
    const double cs = std::fabs(y[r] * resid);
    if (cs > 1e-8 * (1.0 + std::fabs(y[r]))) {
      violation(cs, "row " + std::to_string(r) + ": complementary slackness fails");
    }
  }

  for (std::size_t i = 0; i < nc; ++i) {
    const double lx = mx[sc.left_offset + i];
    const double rx = mx[sc.right_offset + i];
    const double yl = y[sc.left_offset + i];
    const double yr = y[sc.right_offset + i];
    const bool left_active = lx <= activity_tol;
    const bool right_active = rx <= activity_tol;
    if (left_active) rep.active_left.push_back(static_cast<int>(i));
    if (right_active) rep.active_right.push_back(static_cast<int>(i));
    const std::string pair = "pair " + std::to_string(i);
    if (left_active && right_active) {
      rep.weakly_active.push_back(static_cast<int>(i));
      if (yl < -zero_tol) {
        violation(-yl, pair + ": negative left multiplier on weakly active pair");
      }
      if (yr < -zero_tol) {
        violation(-yr, pair + ": negative right multiplier on weakly active pair");
      }
    } else if (left_active) {
      if (std::fabs(yr) > zero_tol) {
        violation(std::fabs(yr), pair + ": nonzero multiplier on inactive right side");
      }
    } else if (right_active) {
      if (std::fabs(yl) > zero_tol) {
        violation(std::fabs(yl), pair + ": nonzero multiplier on inactive left side");
      }
    } else {
      violation(std::min(lx, rx), pair + ": both sides positive");
    }
  }

  rep.holds = rep.violations.empty();
  return rep;
}

}  // namespace

void validate(const SolverOptions& o) {
  if (!(o.rho0 > 0.0)) throw InvalidValue("rho0 must be positive");
  if (!(o.beta > 1.0)) throw InvalidValue("beta must exceed 1");
  if (!(o.tol_stationarity > 0.0)) throw InvalidValue("tol_stationarity must be positive");
  if (!(o.tol_complementarity > 0.0)) {
    throw InvalidValue("tol_complementarity must be positive");
  }
  if (!(o.rho_max >= o.rho0)) throw InvalidValue("rho_max must be at least rho0");
  if (o.max_inner < 1) throw InvalidValue("max_inner must be at least 1");
  if (!(o.activity_tol > 0.0)) throw InvalidValue("activity_tol must be positive");
}

const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::StationaryPoint: return "STATIONARY_POINT";
    case SolveStatus::PenaltyLimit: return "PENALTY_LIMIT";
    case SolveStatus::IterationLimit: return "ITERATION_LIMIT";
    case SolveStatus::Infeasible: return "INFEASIBLE";
  }
  return "UNKNOWN";
}

StepLength optimal_step_length(const LcqpProblem& p, const PenaltyContext& ctx,
                               const Vector& x, const Vector& x_star) {
  const std::size_t n = p.n();
  StepLength r;
  Vector step(n);
  for (std::size_t i = 0; i < n; ++i) step[i] = x_star[i] - x[i];
  r.step_norm = norm_inf(step);
  if (r.step_norm <= 1e-14) return r;

  Vector qp;
  matvec(p.Q, step, qp);
  r.gamma = dot(step, qp);
  Vector cp;
  matvec(ctx.C, step, cp);
  r.delta = ctx.rho * dot(step, cp);
  r.curvature = r.gamma + r.delta;
  r.descent = dot(x, qp) + ctx.rho * dot(x, cp) + dot(p.g, step);
  if (r.delta <= 0.0) {
    r.alpha = 1.0;
  } else {
    r.alpha = std::clamp(-r.descent / r.curvature, 0.0, 1.0);
  }
  return r;
}

double stationarity_residual(const LcqpProblem& p, const PenaltyContext& ctx,
                             const StackedConstraints& sc, const Vector& x,
                             const Vector& y) {
  Vector grad;
  matvec(p.Q, x, grad);
  Vector cx;
  matvec(ctx.C, x, cx);
  axpy(ctx.rho, cx, grad);
  axpy(1.0, p.g, grad);
  Vector mty;
  matvec_transpose(sc.M, y, mty);
  axpy(-1.0, mty, grad);
  double r = norm_inf(grad);

  Vector mx;
  matvec(sc.M, x, mx);
  for (std::size_t i = 0; i < mx.size(); ++i) {
    const double resid = mx[i] - sc.lower[i];
    if (resid < 0.0) r = std::max(r, -resid);
    if (y[i] < 0.0) r = std::max(r, -y[i]);
    r = std::max(r, std::fabs(y[i] * resid));
  }
  return r;
}

double stationarity_residual(const LcqpProblem& p, const PenaltyContext& ctx,
                             const Vector& x, const Vector& y) {
  return stationarity_residual(p, ctx, build_stacked(p), x, y);
}

CertificateReport check_strong_stationarity(const LcqpProblem& p, const Vector& x,
                                            const Vector& y, double activity_tol) {
  const StackedConstraints sc = build_stacked(p);
  if (y.size() != sc.M.rows()) {
    throw DimensionMismatch("multiplier vector has length " +
                            std::to_string(y.size()) + ", expected " +
                            std::to_string(sc.M.rows()) + " stacked rows");
  }
  const double viol = polyhedron_violation(p, x);
  if (viol > 1e-8) {
    throw NotFeasible("point violates the constraints by " + std::to_string(viol));
  }
  return certify(p, sc, x, y, activity_tol);
}

SolverResult solve(const LcqpProblem& p, const SolverOptions& opts) {
  validate(p);
  validate(opts);
  const std::size_t n = p.n();

  const InitMode mode = opts.init_mode.value_or(
      p.x0.empty() ? InitMode::ZeroPenaltyQp : InitMode::GivenX0);
  if (mode == InitMode::GivenX0 && p.x0.empty()) {
    throw InvalidValue("init mode GivenX0 requires an x0");
  }

  QpWorkspace ws(p, p.x0);
  const StackedConstraints& sc = ws.stacked();
  PenaltyContext ctx = make_penalty_context(p, opts.rho0);

  SolverResult res;

  // Initial iterate: either the unpenalized QP solution or the Q-norm
  // projection of x0 onto the polyhedron (a no-op when x0 is feasible).
  Vector c(n);
  if (mode == InitMode::ZeroPenaltyQp) {
    c = p.g;
  } else {
    Vector qx0;
    matvec(p.Q, p.x0, qx0);
    for (std::size_t i = 0; i < n; ++i) c[i] = -qx0[i];
  }
  QpSolveInfo info = ws.solve(c);

  Vector x = ws.primal();
  Vector y_qp = ws.dual();
  double rho = opts.rho0;
  int outer = 0;
  long inner_total = 0;
  bool entered_loop = false;
  SolveStatus status = SolveStatus::IterationLimit;

  if (info.status != QpStatus::Optimal) {
    status = map_qp_failure(info.status);
  } else {
    double best_phi = std::numeric_limits<double>::infinity();
    Vector best_x, best_y;
    double best_rho = rho;
    bool done = false;
    entered_loop = true;

    while (!done) {
      ctx.rho = rho;
      int inner = 0;
      int refine_hops = 0;

      for (;;) {
        const double stat = stationarity_residual(p, ctx, sc, x, y_qp);
        if (stat <= opts.tol_stationarity) break;
        if (inner >= opts.max_inner) {
          status = SolveStatus::IterationLimit;
          done = true;
          break;
        }
        Vector d;
        matvec(ctx.C, x, d);
        for (std::size_t i = 0; i < n; ++i) c[i] = p.g[i] + rho * d[i];
        info = ws.solve(c);
        if (info.status != QpStatus::Optimal) {
          status = map_qp_failure(info.status);
          done = true;
          break;
        }
        const Vector& xs = ws.primal();
        y_qp = ws.dual();
        const StepLength sl = optimal_step_length(p, ctx, x, xs);

        // In exact arithmetic the slope toward the subproblem solution is
        // strictly negative whenever the step is nonzero. Numerically it
        // bottoms out at the subproblem's own solve noise, which scales with
        // the merit magnitude; below that floor the line search has no
        // signal to act on and a zero step would freeze the iterate (the
        // gradient, and hence the subproblem, would never change again).
        const double noise_floor =
            1e-11 * (1.0 + std::fabs(merit(p, ctx, x)));
        if (sl.descent >= -noise_floor) {
          const double full_step_change = sl.descent + 0.5 * sl.curvature;
          if (sl.step_norm > 10.0 * opts.tol_stationarity &&
              full_step_change <= noise_floor && refine_hops < 25) {
            // The subproblem solution is still outside the fixed-point
            // identification band and moving to it cannot raise the merit
            // above the noise floor: take it as a plain refinement of the
            // iterate rather than a merit step.
            ++refine_hops;
            x = xs;
            continue;
          }
          // Converged as far as the arithmetic resolves for this stage.
          break;
        }

        for (std::size_t i = 0; i < n; ++i) x[i] += sl.alpha * (xs[i] - x[i]);
        ++inner;
        ++inner_total;
        res.trace.records.push_back({outer, inner, rho, sl.alpha,
                                     merit(p, ctx, x), stat,
                                     complementarity_residual(p, x), sl.descent,
                                     sl.step_norm, info.changes});
      }
      if (done) break;

      if (opts.resolve_probe) {
        Vector d;
        matvec(ctx.C, x, d);
        for (std::size_t i = 0; i < n; ++i) c[i] = p.g[i] + rho * d[i];
        const QpSolveInfo probe = ws.solve(c);
        if (probe.status == QpStatus::Optimal) {
          double dist = 0.0;
          const Vector& xp = ws.primal();
          for (std::size_t i = 0; i < n; ++i) {
            dist = std::max(dist, std::fabs(xp[i] - x[i]));
          }
          res.trace.probe_move.push_back(dist);
          y_qp = ws.dual();
          res.trace.probe_stationarity.push_back(
              stationarity_residual(p, ctx, sc, x, y_qp));
        }
      }

      const double phi = complementarity_residual(p, x);
      if (phi < best_phi) {
        best_phi = phi;
        best_x = x;
        best_y = y_qp;
        best_rho = rho;
      }
      if (phi <= opts.tol_complementarity) {
        status = SolveStatus::StationaryPoint;
        break;
      }
      if (rho * opts.beta > opts.rho_max) {
        // Penalty budget exhausted: report the stage iterate with the
        // smallest complementarity penalty.
        status = SolveStatus::PenaltyLimit;
        x = best_x;
        y_qp = best_y;
        rho = best_rho;
        ctx.rho = rho;
        break;
      }
      rho *= opts.beta;
      ++outer;
    }
  }

  res.status = status;
  res.x = x;
  Vector mx;
  matvec(sc.M, x, mx);
  res.y = fold_penalty_duals(y_qp, sc, mx, rho);

  res.y_general.assign(p.n_general(), 0.0);
  res.y_left.assign(p.n_pairs(), 0.0);
  res.y_right.assign(p.n_pairs(), 0.0);
  res.y_box.clear();
  for (std::size_t r = 0; r < sc.M.rows(); ++r) {
    const RowOrigin o = sc.origin[r];
    switch (o.kind) {
      case RowKind::General: res.y_general[o.index] = res.y[r]; break;
      case RowKind::CompLeft: res.y_left[o.index] = res.y[r]; break;
      case RowKind::CompRight: res.y_right[o.index] = res.y[r]; break;
      default: res.y_box.push_back(res.y[r]); break;
    }
  }

  res.objective = objective(p, x);
  res.phi = complementarity_residual(p, x);
  res.stationarity = stationarity_residual(p, ctx, sc, x, y_qp);
  res.final_rho = rho;
  res.outer_iterations = entered_loop ? outer + 1 : 0;
  res.inner_iterations = inner_total;
  res.factorization_count = ws.factorization_count();
  res.refinement_count = ws.refinement_count();
  res.active_set_changes = ws.active_set_changes();

  if (polyhedron_violation(p, x) <= 1e-8) {
    res.certificate = certify(p, sc, x, res.y, opts.activity_tol);
  } else {
    res.certificate.holds = false;
    res.certificate.activity_tol = opts.activity_tol;
    res.certificate.violations.push_back("point violates the constraints");
  }
  return res;
}

}  // namespace lcqp
