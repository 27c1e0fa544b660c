#include "lcqp/oracle.hpp"

#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>

namespace lcqp::oracle {
namespace {

// Plain Gaussian elimination with partial pivoting, kept deliberately
// separate from the production factorization path. Returns false on a
// singular (to working precision) system.
bool lu_solve(Matrix k, Vector rhs, Vector& out) {
  const std::size_t n = k.rows();
  double scale = 0.0;
  for (std::size_t i = 0; i < n * n; ++i) {
    scale = std::max(scale, std::fabs(k.data()[i]));
  }
  if (scale == 0.0) return false;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t piv = col;
    for (std::size_t i = col + 1; i < n; ++i) {
      if (std::fabs(k(i, col)) > std::fabs(k(piv, col))) piv = i;
    }
    if (std::fabs(k(piv, col)) <= 1e-13 * scale) return false;
    if (piv != col) {
      for (std::size_t j = 0; j < n; ++j) std::swap(k(piv, j), k(col, j));
      std::swap(rhs[piv], rhs[col]);
    }
    for (std::size_t i = col + 1; i < n; ++i) {
      const double f = k(i, col) / k(col, col);
      if (f == 0.0) continue;
      for (std::size_t j = col; j < n; ++j) k(i, j) -= f * k(col, j);
      rhs[i] -= f * rhs[col];
    }
  }
  out.assign(n, 0.0);
  for (std::size_t i = n; i-- > 0;) {
    double s = rhs[i];
    for (std::size_t j = i + 1; j < n; ++j) s -= k(i, j) * out[j];
    out[i] = s / k(i, i);
  }
  return true;
}

struct StackedRows {
  Matrix m;
  Vector lower;
  std::size_t left_offset = 0;   // first row of the L block
  std::size_t right_offset = 0;  // first row of the R block
};

// Rows ordered [A; L; R; finite lb; finite ub].
StackedRows stack_rows(const LcqpProblem& p) {
  const std::size_t n = p.n();
  std::size_t rows = p.n_general() + 2 * p.n_pairs();
  std::vector<std::size_t> lb_idx, ub_idx;
  for (std::size_t j = 0; j < p.lb.size(); ++j) {
    if (std::isfinite(p.lb[j])) lb_idx.push_back(j);
  }
  for (std::size_t j = 0; j < p.ub.size(); ++j) {
    if (std::isfinite(p.ub[j])) ub_idx.push_back(j);
  }
  rows += lb_idx.size() + ub_idx.size();

  StackedRows s;
  s.m = Matrix(rows, n);
  s.lower.assign(rows, 0.0);
  s.left_offset = p.n_general();
  s.right_offset = p.n_general() + p.n_pairs();
  std::size_t r = 0;
  for (std::size_t i = 0; i < p.n_general(); ++i, ++r) {
    for (std::size_t j = 0; j < n; ++j) s.m(r, j) = p.A(i, j);
    s.lower[r] = p.b[i];
  }
  for (std::size_t i = 0; i < p.n_pairs(); ++i, ++r) {
    for (std::size_t j = 0; j < n; ++j) s.m(r, j) = p.L(i, j);
  }
  for (std::size_t i = 0; i < p.n_pairs(); ++i, ++r) {
    for (std::size_t j = 0; j < n; ++j) s.m(r, j) = p.R(i, j);
  }
  for (std::size_t j : lb_idx) {
    s.m(r, j) = 1.0;
    s.lower[r] = p.lb[j];
    ++r;
  }
  for (std::size_t j : ub_idx) {
    s.m(r, j) = -1.0;
    s.lower[r] = -p.ub[j];
    ++r;
  }
  return s;
}

}  // namespace

RefQpResult reference_qp_solve(const Matrix& q, const Vector& c, const Matrix& m,
                               const Vector& lower,
                               const std::vector<int>& eq_rows) {
  const std::size_t n = q.rows();
  const std::size_t rows = m.rows();
  if (rows > 20) {
    throw OracleCapExceeded("reference QP enumeration supports at most 20 rows, got " +
                            std::to_string(rows));
  }
  std::uint32_t eq_mask = 0;
  for (int r : eq_rows) eq_mask |= std::uint32_t{1} << r;

  constexpr double dual_tol = 1e-10;
  constexpr double feas_tol = 1e-9;

  RefQpResult best;
  best.status = RefStatus::Infeasible;
  best.objective = std::numeric_limits<double>::infinity();

  Vector mx(rows), sol;
  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << rows); ++mask) {
    if ((mask & eq_mask) != eq_mask) continue;
    const std::size_t k = static_cast<std::size_t>(std::popcount(mask));
    if (k > n) continue;

    // KKT system of the equality-constrained subproblem on this subset.
    Matrix kkt(n + k, n + k);
    Vector rhs(n + k, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t j = 0; j < n; ++j) kkt(i, j) = q(i, j);
      rhs[i] = -c[i];
    }
    std::size_t slot = 0;
    std::vector<int> subset;
    for (std::size_t r = 0; r < rows; ++r) {
      if (!(mask >> r & 1)) continue;
      for (std::size_t j = 0; j < n; ++j) {
        kkt(j, n + slot) = -m(r, j);
        kkt(n + slot, j) = m(r, j);
      }
      rhs[n + slot] = lower[r];
      subset.push_back(static_cast<int>(r));
      ++slot;
    }
    if (!lu_solve(std::move(kkt), std::move(rhs), sol)) continue;

    // Multiplier signs: inequality rows need y >= 0.
    bool ok = true;
    for (std::size_t s = 0; s < k && ok; ++s) {
      const int r = subset[s];
      if (!(eq_mask >> r & 1) && sol[n + s] < -dual_tol) ok = false;
    }
    if (!ok) continue;

    Vector x(sol.begin(), sol.begin() + n);
    for (std::size_t r = 0; r < rows; ++r) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += m(r, j) * x[j];
      mx[r] = acc;
    }
    double scale_r = 1.0;
    for (std::size_t r = 0; r < rows && ok; ++r) {
      scale_r = 1.0;
      for (std::size_t j = 0; j < n; ++j) {
        scale_r = std::max(scale_r, std::fabs(m(r, j)));
      }
      if (mx[r] < lower[r] - feas_tol * scale_r) ok = false;
    }
    if (!ok) continue;

    double obj = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double acc = 0.0;
      for (std::size_t j = 0; j < n; ++j) acc += q(i, j) * x[j];
      obj += x[i] * (0.5 * acc + c[i]);
    }
    if (obj < best.objective) {
      best.status = RefStatus::Optimal;
      best.objective = obj;
      best.x = std::move(x);
      best.y.assign(rows, 0.0);
      for (std::size_t s = 0; s < k; ++s) best.y[subset[s]] = sol[n + s];
      best.active = std::move(subset);
    }
  }
  if (best.status == RefStatus::Infeasible) {
    best.objective = 0.0;
  }
  return best;
}

GlobalResult global_solve_by_enumeration(const LcqpProblem& p) {
  const std::size_t n_c = p.n_pairs();
  if (n_c > 12) {
    throw OracleCapExceeded("branch enumeration supports at most 12 pairs, got " +
                            std::to_string(n_c));
  }
  const StackedRows s = stack_rows(p);
  const std::size_t base_rows = s.m.rows();
  const std::size_t n = p.n();

  GlobalResult out;
  out.objective = std::numeric_limits<double>::infinity();
  out.reports.reserve(std::size_t{1} << n_c);

  // A pinned side enters as the pair of inequalities side >= 0, -side >= 0
  // rather than a forced equality row: equivalent at optima (a negative
  // equality multiplier reappears on the negated row), and vacuous or
  // dependent pinned rows cannot poison the KKT systems.
  Matrix m2(base_rows + n_c, n);
  Vector lower2(base_rows + n_c, 0.0);
  for (std::size_t r = 0; r < base_rows; ++r) {
    for (std::size_t j = 0; j < n; ++j) m2(r, j) = s.m(r, j);
    lower2[r] = s.lower[r];
  }

  for (std::uint32_t mask = 0; mask < (std::uint32_t{1} << n_c); ++mask) {
    BranchReport rep;
    rep.branch.resize(n_c);
    for (std::size_t k = 0; k < n_c; ++k) {
      const bool right = (mask >> k & 1) != 0;
      rep.branch[k] = right ? BranchSide::RightZero : BranchSide::LeftZero;
      const std::size_t pinned =
          (right ? s.right_offset : s.left_offset) + k;
      for (std::size_t j = 0; j < n; ++j)
        m2(base_rows + k, j) = -s.m(pinned, j);
    }
    RefQpResult r = reference_qp_solve(p.Q, p.g, m2, lower2, {});
    rep.feasible = r.status == RefStatus::Optimal;
    if (rep.feasible) {
      rep.x = r.x;
      rep.objective = r.objective;
      if (r.objective < out.objective) {
        out.feasible = true;
        out.objective = r.objective;
        out.x = r.x;
        out.branch = rep.branch;
      }
    }
    out.reports.push_back(std::move(rep));
  }
  if (!out.feasible) out.objective = 0.0;
  return out;
}

GridSearchResult grid_line_search(const LcqpProblem& p, const PenaltyContext& ctx,
                                  const Vector& x, const Vector& x_star,
                                  double resolution) {
  const std::size_t n = p.n();
  // Exact one-dimensional restriction of the merit along x + alpha p:
  // psi(alpha) = psi(x) + alpha ell + alpha^2/2 (p^T Q p + rho p^T C p),
  // coefficients accumulated with plain loops.
  Vector step(n);
  for (std::size_t i = 0; i < n; ++i) step[i] = x_star[i] - x[i];

  double curv = 0.0, slope = 0.0, base = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double hp = 0.0, hx = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      const double hij = p.Q(i, j) + ctx.rho * ctx.C(i, j);
      hp += hij * step[j];
      hx += hij * x[j];
    }
    curv += step[i] * hp;
    slope += x[i] * hp + p.g[i] * step[i];
    base += x[i] * (0.5 * hx + p.g[i]);
  }

  const std::size_t samples = static_cast<std::size_t>(std::ceil(1.0 / resolution));
  GridSearchResult best{0.0, base};
  for (std::size_t i = 1; i <= samples; ++i) {
    const double a = std::min(1.0, static_cast<double>(i) * resolution);
    const double v = base + a * slope + 0.5 * a * a * curv;
    if (v < best.value) {
      best.alpha = a;
      best.value = v;
    }
  }
  return best;
}

}  // namespace lcqp::oracle
