#include "lcqp/problem.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace lcqp {
namespace {

bool all_finite(const Vector& v) {
  for (double x : v) {
    if (!std::isfinite(x)) return false;
  }
  return true;
}

bool all_finite(const Matrix& m) {
  const double* d = m.data();
  for (std::size_t i = 0, e = m.rows() * m.cols(); i < e; ++i) {
    if (!std::isfinite(d[i])) return false;
  }
  return true;
}

double max_abs(const Matrix& m) {
  return kernels::active().norm_inf(m.data(), m.rows() * m.cols());
}

void check_shape(const Matrix& m, std::size_t rows, std::size_t cols,
                 const char* field) {
  if (m.rows() != rows || (rows > 0 && m.cols() != cols)) {
    throw DimensionMismatch(std::string(field) + " has shape " +
                            std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected " +
                            std::to_string(rows) + "x" + std::to_string(cols));
  }
}

}  // namespace

void validate(const LcqpProblem& p) {
  // Q is the dimension authority; g is checked against it so a wrong-length
  // gradient is reported as such rather than blamed on Q.
  const std::size_t n = p.Q.rows() > 0 ? p.Q.rows() : p.n();
  if (n == 0) throw DimensionMismatch("g is empty; at least one variable required");
  check_shape(p.Q, n, n, "Q");
  if (p.g.size() != n) {
    throw DimensionMismatch("g has length " + std::to_string(p.g.size()) +
                            ", expected " + std::to_string(n));
  }
  check_shape(p.A, p.A.rows(), n, "A");
  if (p.b.size() != p.A.rows()) {
    throw DimensionMismatch("b has length " + std::to_string(p.b.size()) +
                            ", expected " + std::to_string(p.A.rows()) +
                            " to match A");
  }
  if (p.L.rows() != p.R.rows()) {
    throw DimensionMismatch("L has " + std::to_string(p.L.rows()) +
                            " rows but R has " + std::to_string(p.R.rows()));
  }
  check_shape(p.L, p.L.rows(), n, "L");
  check_shape(p.R, p.R.rows(), n, "R");
  const auto check_optional_len = [n](const Vector& v, const char* name) {
    if (!v.empty() && v.size() != n) {
      throw DimensionMismatch(std::string(name) + " has length " +
                              std::to_string(v.size()) + ", expected " +
                              std::to_string(n));
    }
  };
  check_optional_len(p.lb, "lb");
  check_optional_len(p.ub, "ub");
  check_optional_len(p.x0, "x0");

  if (!all_finite(p.Q)) throw InvalidValue("Q contains a non-finite entry");
  if (!all_finite(p.g)) throw InvalidValue("g contains a non-finite entry");
  if (!all_finite(p.A)) throw InvalidValue("A contains a non-finite entry");
  if (!all_finite(p.b)) throw InvalidValue("b contains a non-finite entry");
  if (!all_finite(p.L)) throw InvalidValue("L contains a non-finite entry");
  if (!all_finite(p.R)) throw InvalidValue("R contains a non-finite entry");
  if (!all_finite(p.x0)) throw InvalidValue("x0 contains a non-finite entry");
  for (double v : p.lb) {
    if (std::isnan(v) || v == std::numeric_limits<double>::infinity()) {
      throw InvalidValue("lb entries must be finite or -inf");
    }
  }
  for (double v : p.ub) {
    if (std::isnan(v) || v == -std::numeric_limits<double>::infinity()) {
      throw InvalidValue("ub entries must be finite or +inf");
    }
  }
  if (!p.lb.empty() && !p.ub.empty()) {
    for (std::size_t j = 0; j < n; ++j) {
      if (p.lb[j] > p.ub[j]) {
        throw InvalidValue("lb exceeds ub at index " + std::to_string(j));
      }
    }
  }

  const double sym_tol = 1e-12 * std::max(1.0, max_abs(p.Q));
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (std::fabs(p.Q(i, j) - p.Q(j, i)) > sym_tol) {
        throw NonSymmetricHessian("Q is not symmetric at (" + std::to_string(i) +
                                  ", " + std::to_string(j) + ")");
      }
    }
  }

  Cholesky chol;
  if (!chol.factorize(p.Q)) {
    throw IndefiniteHessian("Q is not positive definite");
  }
}

double objective(const LcqpProblem& p, const Vector& x) {
  return 0.5 * quad_form(p.Q, x) + dot(p.g, x);
}

double complementarity_residual(const LcqpProblem& p, const Vector& x) {
  if (p.n_pairs() == 0) return 0.0;
  Vector lx, rx;
  matvec(p.L, x, lx);
  matvec(p.R, x, rx);
  return dot(lx, rx);
}

PenaltyContext make_penalty_context(const LcqpProblem& p, double rho) {
  const std::size_t n = p.n();
  PenaltyContext ctx;
  ctx.rho = rho;
  ctx.C = Matrix(n, n);
  const auto& ops = kernels::active();
  for (std::size_t k = 0; k < p.n_pairs(); ++k) {
    const double* lk = p.L.row(k);
    const double* rk = p.R.row(k);
    for (std::size_t i = 0; i < n; ++i) {
      double* ci = ctx.C.row(i);
      if (lk[i] != 0.0) ops.axpy(lk[i], rk, ci, n);
      if (rk[i] != 0.0) ops.axpy(rk[i], lk, ci, n);
    }
  }
  return ctx;
}

double merit(const LcqpProblem& p, const PenaltyContext& ctx, const Vector& x) {
  return objective(p, x) + 0.5 * ctx.rho * quad_form(ctx.C, x);
}

double polyhedron_violation(const LcqpProblem& p, const Vector& x) {
  double v = 0.0;
  Vector tmp;
  if (p.n_general() > 0) {
    matvec(p.A, x, tmp);
    for (std::size_t i = 0; i < tmp.size(); ++i) v = std::max(v, p.b[i] - tmp[i]);
  }
  if (p.n_pairs() > 0) {
    matvec(p.L, x, tmp);
    for (double t : tmp) v = std::max(v, -t);
    matvec(p.R, x, tmp);
    for (double t : tmp) v = std::max(v, -t);
  }
  for (std::size_t j = 0; j < p.lb.size(); ++j) v = std::max(v, p.lb[j] - x[j]);
  for (std::size_t j = 0; j < p.ub.size(); ++j) v = std::max(v, x[j] - p.ub[j]);
  return v;
}

}  // namespace lcqp
