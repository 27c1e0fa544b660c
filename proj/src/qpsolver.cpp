#include "lcqp/qpsolver.hpp"

#include <cassert>
#include <cmath>
#include <cstring>
#include <limits>

namespace lcqp {
namespace {

constexpr double kRateTol = 1e-13;    // drift-rate threshold for ratio tests
constexpr double kDepTol = 1e-24;     // squared relative dependence cutoff
constexpr double kLambdaTol = 1e-11;  // exchange multiplier positivity
constexpr double kDepMismatchTol = 1e-10;  // bound-rate agreement for skips
// Zero-length path events are degenerate-vertex resolution; firing them on
// rates that are only factorization noise swaps rows forever without moving
// the path. A zero-length event therefore needs a rate clearly above the
// noise an ill-conditioned solve can produce, while positive-length events
// keep the usual far tighter threshold so no genuine blocker is overrun.
constexpr double kNoiseRate = 1e-8;
constexpr int kMaxRepaths = 6;  // homotopy restarts allowed per solve
constexpr double kRamp = 1e-4;  // per-row stagger of relaunched bound levels
constexpr double kPrimalTol = 1e-10;
constexpr double kDualTol = 1e-10;
constexpr double kRefineThreshold = 0.5e-9;
constexpr double kTie = 1e-12;

// Lexicographic (value, row-index) preference with a relative tie band;
// keeps event selection deterministic under degeneracy.
bool better_candidate(double t, int row, double best_t, int best_row) {
  const double band = kTie * (1.0 + std::fabs(best_t));
  if (t < best_t - band) return true;
  return t < best_t + band && row < best_row;
}

}  // namespace

StackedConstraints build_stacked(const LcqpProblem& p) {
  const std::size_t n = p.n();
  std::vector<std::size_t> lb_idx, ub_idx;
  for (std::size_t j = 0; j < p.lb.size(); ++j) {
    if (std::isfinite(p.lb[j])) lb_idx.push_back(j);
  }
  for (std::size_t j = 0; j < p.ub.size(); ++j) {
    if (std::isfinite(p.ub[j])) ub_idx.push_back(j);
  }
  const std::size_t rows =
      p.n_general() + 2 * p.n_pairs() + lb_idx.size() + ub_idx.size();

  StackedConstraints sc;
  sc.M = Matrix(rows, n);
  sc.lower.assign(rows, 0.0);
  sc.origin.resize(rows);
  sc.left_offset = p.n_general();
  sc.right_offset = p.n_general() + p.n_pairs();
  sc.box_offset = p.n_general() + 2 * p.n_pairs();

  std::size_t r = 0;
  for (std::size_t i = 0; i < p.n_general(); ++i, ++r) {
    std::memcpy(sc.M.row(r), p.A.row(i), n * sizeof(double));
    sc.lower[r] = p.b[i];
    sc.origin[r] = {RowKind::General, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < p.n_pairs(); ++i, ++r) {
    std::memcpy(sc.M.row(r), p.L.row(i), n * sizeof(double));
    sc.origin[r] = {RowKind::CompLeft, static_cast<int>(i)};
  }
  for (std::size_t i = 0; i < p.n_pairs(); ++i, ++r) {
    std::memcpy(sc.M.row(r), p.R.row(i), n * sizeof(double));
    sc.origin[r] = {RowKind::CompRight, static_cast<int>(i)};
  }
  for (std::size_t j : lb_idx) {
    sc.M(r, j) = 1.0;
    sc.lower[r] = p.lb[j];
    sc.origin[r] = {RowKind::BoxLower, static_cast<int>(j)};
    ++r;
  }
  for (std::size_t j : ub_idx) {
    sc.M(r, j) = -1.0;
    sc.lower[r] = -p.ub[j];
    sc.origin[r] = {RowKind::BoxUpper, static_cast<int>(j)};
    ++r;
  }
  return sc;
}

QpWorkspace::QpWorkspace(const LcqpProblem& p, const Vector& x_hint)
    : n_(p.n()), q_(p.Q), sc_(build_stacked(p)), gram_(p.n()) {
  if (!chol_.factorize(q_)) {
    throw IndefiniteHessian("Q is not positive definite");
  }
  factorization_count_ = 1;
  m_ = sc_.M.rows();

  const auto& ops = kernels::active();
  row_scale_.assign(m_, 0.0);
  for (std::size_t i = 0; i < m_; ++i) {
    row_scale_[i] = ops.norm_inf(sc_.M.row(i), n_);
  }

  x_.assign(n_, 0.0);
  if (!x_hint.empty()) {
    assert(x_hint.size() == n_);
    x_ = x_hint;
  }
  for (std::size_t j = 0; j < p.lb.size(); ++j) {
    if (std::isfinite(p.lb[j])) x_[j] = std::max(x_[j], p.lb[j]);
  }
  for (std::size_t j = 0; j < p.ub.size(); ++j) {
    if (std::isfinite(p.ub[j])) x_[j] = std::min(x_[j], p.ub[j]);
  }

  y_.assign(m_, 0.0);
  in_w_.assign(m_, 0);
  wfac_ = Matrix(n_, n_);
  tmp_n_.assign(n_, 0.0);
  tmp_n2_.assign(n_, 0.0);
  tmp_m_.assign(m_, 0.0);
  resid_.assign(m_, 0.0);
  dx_.assign(n_, 0.0);
  mdx_.assign(m_, 0.0);
  wrow_.assign(n_, 0.0);

  reanchor();
}

// Re-certifies the workspace at the current primal point with an empty
// working set: x is optimal for c = -Qx over bounds relaxed to touch x.
// Used for the cold start and to recover a consistent state after an
// abnormal path exit.
//
// Each bound is pulled a strictly distinct margin below the point, so the
// relaunched parametric run starts strictly interior and no two rows reach
// their bounds at the same instant. Ties are what make degenerate vertices
// cycle: simultaneous events arrive with zero dual mass and exchange each
// other forever at no cost. The staggered margins split the ties, and the
// targets are untouched, so the path still ends at the exact requested
// bounds.
void QpWorkspace::reanchor() {
  w_.clear();
  gram_.clear();
  std::fill(in_w_.begin(), in_w_.end(), 0);
  std::fill(y_.begin(), y_.end(), 0.0);
  matvec(q_, x_, tmp_n_);
  c_cur_.assign(n_, 0.0);
  for (std::size_t i = 0; i < n_; ++i) c_cur_[i] = -tmp_n_[i];
  matvec(sc_.M, x_, tmp_m_);
  lower_cur_ = sc_.lower;
  for (std::size_t i = 0; i < m_; ++i) {
    const double margin = kRamp * (1.0 + row_scale_[i]) *
                          (1.0 + static_cast<double>(i) / static_cast<double>(m_));
    lower_cur_[i] = std::min(lower_cur_[i], tmp_m_[i]) - margin;
  }
}

void QpWorkspace::compute_residual(const Vector& lower_ref, Vector& out) const {
  Vector mx;
  matvec(sc_.M, x_, mx);
  out.resize(m_);
  for (std::size_t i = 0; i < m_; ++i) out[i] = mx[i] - lower_ref[i];
}

void QpWorkspace::make_w_row(int row, Vector& w_out) const {
  w_out.assign(sc_.M.row(row), sc_.M.row(row) + n_);
  chol_.solve_lower(w_out);
}

void QpWorkspace::remove_slot(std::size_t slot) {
  const std::size_t k = w_.size();
  gram_.remove(slot);
  if (slot + 1 < k) {
    std::memmove(wfac_.row(slot), wfac_.row(slot + 1),
                 (k - 1 - slot) * n_ * sizeof(double));
  }
  in_w_[w_[slot]] = 0;
  w_.erase(w_.begin() + static_cast<std::ptrdiff_t>(slot));
}

// Brings `row` into the working set, exchanging against dependent rows as
// needed. A dependent row is judged at the target bounds first: if its
// bound is implied by the same combination of working-row bounds, the add
// is a no-op and the row is skipped outright — the dependence coefficients
// of an implied row are dominated by solve noise, far too fragile to pick
// an eviction by. Only a row whose bound strictly exceeds the implied
// combination needs room made for it; if no working row can yield any
// (no positive multiplier), that combination is a Farkas certificate and
// the problem is infeasible.
QpWorkspace::AddOutcome QpWorkspace::try_add(int row, long& iter_budget,
                                             QpStatus& status) {
  const auto& ops = kernels::active();
  for (;;) {
    if (--iter_budget < 0) {
      y_[row] = 0.0;
      status = QpStatus::IterationLimit;
      return AddOutcome::Failed;
    }
    make_w_row(row, wrow_);
    const std::size_t k = w_.size();
    tmp_k_.assign(k, 0.0);
    ops.gemv(wfac_.data(), k, n_, wrow_.data(), tmp_k_.data());
    const double diag = ops.dot(wrow_.data(), wrow_.data(), n_);

    if (k < n_ && gram_.append(tmp_k_, diag, kDepTol)) {
      std::memcpy(wfac_.row(k), wrow_.data(), n_ * sizeof(double));
      in_w_[row] = 1;
      w_.push_back(row);
      ++active_set_changes_;
      return AddOutcome::Added;
    }

    // Dependent row: M_row^T = sum_s lambda_s M_{w_s}^T.
    Vector lambda = tmp_k_;
    gram_.solve(lambda);
    // The normal-equation solve squares the working-set conditioning, so at
    // a near-singular vertex the raw coefficients can be noise. Refinement
    // sweeps against the factored rows restore the digits the consistency
    // and ratio tests below depend on.
    for (int sweep = 0; sweep < 2; ++sweep) {
      tmp_n_.assign(n_, 0.0);
      ops.gemv_t(wfac_.data(), k, n_, lambda.data(), tmp_n_.data());
      for (std::size_t i = 0; i < n_; ++i) tmp_n_[i] = wrow_[i] - tmp_n_[i];
      tmp_k_.assign(k, 0.0);
      ops.gemv(wfac_.data(), k, n_, tmp_n_.data(), tmp_k_.data());
      gram_.solve(tmp_k_);
      for (std::size_t s = 0; s < k; ++s) lambda[s] += tmp_k_[s];
    }

    // Judge the dependence at the target bounds before touching the working
    // set. A row whose bound matches the implied combination is a no-op add;
    // one whose bound falls strictly below it is implied with slack. Either
    // way no room is needed.
    double mismatch = sc_.lower[row];
    double scale = std::fabs(sc_.lower[row]);
    for (std::size_t s = 0; s < k; ++s) {
      const double term = lambda[s] * sc_.lower[w_[s]];
      mismatch -= term;
      scale += std::fabs(term);
    }
    if (mismatch <= kDepMismatchTol * (1.0 + scale)) {
      y_[row] = 0.0;
      return AddOutcome::Skipped;
    }

    // The row's bound strictly exceeds the implied combination: room must be
    // made. Shift multiplier mass onto `row` until some working row's
    // multiplier hits zero and retire that row.
    double lam_norm = 0.0;
    for (double v : lambda) lam_norm = std::max(lam_norm, std::fabs(v));
    double best_t = std::numeric_limits<double>::infinity();
    int best_slot = -1;
    for (std::size_t s = 0; s < k; ++s) {
      if (lambda[s] > kLambdaTol * (1.0 + lam_norm)) {
        const double t = std::max(y_[w_[s]], 0.0) / lambda[s];
        if (best_slot < 0 ||
            better_candidate(t, w_[s], best_t, w_[static_cast<std::size_t>(best_slot)])) {
          best_t = t;
          best_slot = static_cast<int>(s);
        }
      }
    }
    if (best_slot < 0) {
      // With every multiplier nonpositive, any point satisfying the working
      // rows' target bounds has M_row x <= sum_s lambda_s lower_{w_s},
      // which stays strictly below this row's own bound: a Farkas
      // certificate of infeasibility.
      y_[row] = 0.0;
      status = QpStatus::Infeasible;
      return AddOutcome::Failed;
    }
    for (std::size_t s = 0; s < k; ++s) {
      y_[w_[s]] = std::max(y_[w_[s]] - best_t * lambda[s], 0.0);
    }
    y_[row] += best_t;
    y_[w_[static_cast<std::size_t>(best_slot)]] = 0.0;
    remove_slot(static_cast<std::size_t>(best_slot));
    ++active_set_changes_;
  }
}

// Exact equality-constrained re-solve on the current working set at the
// certified parameters.
void QpWorkspace::polish() {
  const auto& ops = kernels::active();
  const std::size_t k = w_.size();
  tmp_n_ = c_cur_;
  chol_.solve_lower(tmp_n_);  // v = L^{-1} c
  dyw_.assign(k, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    dyw_[s] = lower_cur_[w_[s]] + ops.dot(wfac_.row(s), tmp_n_.data(), n_);
  }
  gram_.solve(dyw_);
  tmp_n2_.assign(n_, 0.0);
  ops.gemv_t(wfac_.data(), k, n_, dyw_.data(), tmp_n2_.data());
  axpy(-1.0, tmp_n_, tmp_n2_);
  chol_.solve_lower_transpose(tmp_n2_);
  x_ = tmp_n2_;
  std::fill(y_.begin(), y_.end(), 0.0);
  for (std::size_t s = 0; s < k; ++s) y_[w_[s]] = dyw_[s];
}

// One correction pass through the existing factorizations against the exact
// KKT residual of the current working set.
void QpWorkspace::refine_once() {
  const auto& ops = kernels::active();
  const std::size_t k = w_.size();
  Vector r_stat;
  matvec(q_, x_, r_stat);
  axpy(1.0, c_cur_, r_stat);
  matvec_transpose(sc_.M, y_, tmp_n_);
  axpy(-1.0, tmp_n_, r_stat);

  Vector r_feas(k, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    const int row = w_[s];
    r_feas[s] = ops.dot(sc_.M.row(row), x_.data(), n_) - lower_cur_[row];
  }

  chol_.solve_lower(r_stat);  // v = L^{-1} r_stat
  Vector dy(k, 0.0);
  for (std::size_t s = 0; s < k; ++s) {
    dy[s] = -r_feas[s] + ops.dot(wfac_.row(s), r_stat.data(), n_);
  }
  gram_.solve(dy);
  tmp_n2_.assign(n_, 0.0);
  ops.gemv_t(wfac_.data(), k, n_, dy.data(), tmp_n2_.data());
  axpy(-1.0, r_stat, tmp_n2_);
  chol_.solve_lower_transpose(tmp_n2_);
  axpy(1.0, tmp_n2_, x_);
  for (std::size_t s = 0; s < k; ++s) y_[w_[s]] += dy[s];
}

QpStatus QpWorkspace::run_path(const Vector& c_target, long& iter_budget) {
  const auto& ops = kernels::active();
  const Vector c0 = c_cur_;
  const Vector l0 = lower_cur_;
  Vector dc(n_), dl(m_);
  for (std::size_t i = 0; i < n_; ++i) dc[i] = c_target[i] - c0[i];
  for (std::size_t i = 0; i < m_; ++i) dl[i] = sc_.lower[i] - l0[i];

  Vector v = dc;
  chol_.solve_lower(v);
  compute_residual(l0, resid_);

  // Rows whose add was just proven a no-op, valid until the state moves
  // again; without this, the identical event would re-derive the identical
  // verdict forever.
  std::vector<char> hold(m_, 0);

  double tau = 0.0;
  for (;;) {
    if (--iter_budget < 0) {
      reanchor();
      return QpStatus::IterationLimit;
    }
    const std::size_t k = w_.size();

    // Unit-rate direction keeping the working set active and stationary:
    //   S dy_W = dl_W + W L^{-1} dc,   dx = L^{-T} (W^T dy_W - L^{-1} dc).
    dyw_.assign(k, 0.0);
    for (std::size_t s = 0; s < k; ++s) {
      dyw_[s] = dl[w_[s]] + ops.dot(wfac_.row(s), v.data(), n_);
    }
    gram_.solve(dyw_);
    dx_.assign(n_, 0.0);
    ops.gemv_t(wfac_.data(), k, n_, dyw_.data(), dx_.data());
    axpy(-1.0, v, dx_);
    chol_.solve_lower_transpose(dx_);
    matvec(sc_.M, dx_, mdx_);

    const double dx_norm = norm_inf(dx_);
    double dy_norm = 0.0;
    for (double t : dyw_) dy_norm = std::max(dy_norm, std::fabs(t));

    // Ratio tests: earliest event wins, ties resolved toward the smallest
    // constraint index.
    double best_t = 1.0 - tau;
    int best_row = -1;
    int prim_row = -1;
    int dual_slot = -1;
    const auto consider = [&](double t, int row, int slot) {
      const bool take = best_row < 0 ? t < best_t
                                     : better_candidate(t, row, best_t, best_row);
      if (take) {
        best_t = t;
        best_row = row;
        prim_row = slot < 0 ? row : -1;
        dual_slot = slot;
      }
    };
    for (std::size_t i = 0; i < m_; ++i) {
      if (in_w_[i] || hold[i]) continue;
      const double rate = mdx_[i] - dl[i];
      const double scale = 1.0 + row_scale_[i] * dx_norm + std::fabs(dl[i]);
      if (rate < -kRateTol * scale) {
        const double t = std::max(resid_[i], 0.0) / (-rate);
        if (t <= 0.0 && rate >= -kNoiseRate * scale) continue;
        consider(t, static_cast<int>(i), -1);
      }
    }
    for (std::size_t s = 0; s < k; ++s) {
      const double scale = 1.0 + dy_norm;
      if (dyw_[s] < -kRateTol * scale) {
        const double t = std::max(y_[w_[s]], 0.0) / (-dyw_[s]);
        if (t <= 0.0 && dyw_[s] >= -kNoiseRate * scale) continue;
        consider(t, w_[s], static_cast<int>(s));
      }
    }

    if (best_t > 0.0) {
      axpy(best_t, dx_, x_);
      for (std::size_t s = 0; s < k; ++s) y_[w_[s]] += best_t * dyw_[s];
      for (std::size_t i = 0; i < m_; ++i) {
        resid_[i] += best_t * (mdx_[i] - dl[i]);
      }
      tau += best_t;
      std::fill(hold.begin(), hold.end(), 0);
    }

    if (best_row < 0) break;  // reached the target parameters

    if (prim_row >= 0) {
      QpStatus st = QpStatus::Optimal;
      const AddOutcome oc = try_add(prim_row, iter_budget, st);
      if (oc == AddOutcome::Failed) {
        reanchor();
        return st;
      }
      if (oc == AddOutcome::Added) {
        resid_[prim_row] = 0.0;
        std::fill(hold.begin(), hold.end(), 0);
      } else if (best_t <= 0.0) {
        hold[prim_row] = 1;
      }
    } else {
      y_[w_[static_cast<std::size_t>(dual_slot)]] = 0.0;
      remove_slot(static_cast<std::size_t>(dual_slot));
      ++active_set_changes_;
      std::fill(hold.begin(), hold.end(), 0);
    }
  }

  c_cur_ = c_target;
  lower_cur_ = sc_.lower;
  return QpStatus::Optimal;
}

QpSolveInfo QpWorkspace::solve(const Vector& c) {
  assert(c.size() == n_);
  const long changes0 = active_set_changes_;
  const long refine0 = refinement_count_;

  if (c == c_cur_ && lower_cur_ == sc_.lower) {
    return {QpStatus::Optimal, 0, 0};
  }

  long iter_budget = 50 * static_cast<long>(n_ + m_);
  QpStatus st = run_path(c, iter_budget);

  if (st == QpStatus::Optimal) {
    // Polish on the terminal working set, then clean up any activity left
    // inconsistent by tolerance-sized path drift. A violated row that turns
    // out to be implied by the working set carries only factorization noise,
    // and one that keeps bouncing back in after repeated re-admission sits at
    // a degenerate vertex the arithmetic cannot pin down any tighter; both
    // are set aside rather than re-examined forever.
    std::vector<char> shelved(m_, 0);
    std::vector<unsigned char> admissions(m_, 0);
    int repath_rounds = 0;
    for (;;) {
      polish();
      if (--iter_budget < 0) {
        st = QpStatus::IterationLimit;
        reanchor();
        break;
      }
      compute_residual(lower_cur_, resid_);
      int viol_row = -1;
      double viol = kPrimalTol;
      for (std::size_t i = 0; i < m_; ++i) {
        if (in_w_[i] || shelved[i]) continue;
        const double rel = -resid_[i] / std::max(1.0, row_scale_[i]);
        if (rel > viol) {
          viol = rel;
          viol_row = static_cast<int>(i);
        }
      }
      if (viol_row >= 0) {
        // Setting a row aside is only sound while its violation is within
        // factorization noise of the bound; a substantive violation must
        // keep being worked on.
        const bool noise_level = viol <= 100.0 * kPrimalTol;
        if (!noise_level) {
          // A substantive violation here means degenerate churn let the path
          // slip off the constraint fan. Pivoting locally at such a vertex
          // can revisit the same working sets forever, so restart the
          // homotopy instead: re-certify the current point over bounds
          // relaxed to touch it and walk the parameters back in from there.
          if (++repath_rounds > kMaxRepaths) {
            st = QpStatus::IterationLimit;
            reanchor();
            break;
          }
          reanchor();
          st = run_path(c, iter_budget);
          if (st != QpStatus::Optimal) break;  // re-anchored on the way out
          std::fill(shelved.begin(), shelved.end(), 0);
          std::fill(admissions.begin(), admissions.end(), 0);
          continue;
        }
        if (admissions[viol_row] >= 2) {
          shelved[viol_row] = 1;
          continue;
        }
        QpStatus add_st = QpStatus::Optimal;
        const AddOutcome oc = try_add(viol_row, iter_budget, add_st);
        if (oc == AddOutcome::Failed) {
          st = add_st;
          reanchor();
          break;
        }
        if (oc == AddOutcome::Skipped) {
          shelved[viol_row] = 1;
        } else {
          ++admissions[viol_row];
        }
        continue;
      }
      int neg_slot = -1;
      double neg = -kDualTol;
      for (std::size_t s = 0; s < w_.size(); ++s) {
        if (y_[w_[s]] < neg) {
          neg = y_[w_[s]];
          neg_slot = static_cast<int>(s);
        }
      }
      if (neg_slot >= 0) {
        y_[w_[static_cast<std::size_t>(neg_slot)]] = 0.0;
        remove_slot(static_cast<std::size_t>(neg_slot));
        ++active_set_changes_;
        // The smaller working set implies different rows; shelved ones get
        // another look.
        std::fill(shelved.begin(), shelved.end(), 0);
        continue;
      }
      break;
    }
  }

  if (st == QpStatus::Optimal && kkt_residual(c) > kRefineThreshold) {
    refine_once();
    ++refinement_count_;
  }
  return {st, active_set_changes_ - changes0, refinement_count_ - refine0};
}

double QpWorkspace::kkt_residual(const Vector& c) const {
  Vector stat;
  matvec(q_, x_, stat);
  Vector mty;
  matvec_transpose(sc_.M, y_, mty);
  double r = 0.0;
  for (std::size_t i = 0; i < n_; ++i) {
    r = std::max(r, std::fabs(stat[i] + c[i] - mty[i]));
  }
  Vector resid;
  compute_residual(sc_.lower, resid);
  for (std::size_t i = 0; i < m_; ++i) {
    r = std::max(r, std::max(0.0, -resid[i]));
    r = std::max(r, std::max(0.0, -y_[i]));
    r = std::max(r, std::fabs(y_[i] * resid[i]));
  }
  return r;
}

}  // namespace lcqp
