#include "lcqp/linalg.hpp"

#include <cassert>
#include <cmath>

namespace lcqp {

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

double dot(const Vector& x, const Vector& y) {
  assert(x.size() == y.size());
  return kernels::active().dot(x.data(), y.data(), x.size());
}

double norm_inf(const Vector& x) {
  return kernels::active().norm_inf(x.data(), x.size());
}

void axpy(double a, const Vector& x, Vector& y) {
  assert(x.size() == y.size());
  kernels::active().axpy(a, x.data(), y.data(), x.size());
}

void scal(double a, Vector& x) { kernels::active().scal(a, x.data(), x.size()); }

void matvec(const Matrix& a, const Vector& x, Vector& y) {
  assert(x.size() == a.cols());
  y.resize(a.rows());
  kernels::active().gemv(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

void matvec_transpose(const Matrix& a, const Vector& x, Vector& y) {
  assert(x.size() == a.rows());
  y.resize(a.cols());
  kernels::active().gemv_t(a.data(), a.rows(), a.cols(), x.data(), y.data());
}

double quad_form(const Matrix& a, const Vector& x) {
  assert(a.rows() == a.cols() && x.size() == a.rows());
  const auto& ops = kernels::active();
  double acc = 0.0;
  for (std::size_t i = 0; i < a.rows(); ++i) {
    acc += x[i] * ops.dot(a.row(i), x.data(), x.size());
  }
  return acc;
}

bool Cholesky::factorize(const Matrix& q) {
  assert(q.rows() == q.cols());
  const std::size_t n = q.rows();
  const auto& ops = kernels::active();
  l_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    double* li = l_.row(i);
    for (std::size_t j = 0; j < i; ++j) {
      const double* lj = l_.row(j);
      li[j] = (q(i, j) - ops.dot(li, lj, j)) / lj[j];
    }
    const double d = q(i, i) - ops.dot(li, li, i);
    if (!(d > 0.0) || !std::isfinite(d)) {
      l_ = Matrix();
      lt_ = Matrix();
      return false;
    }
    li[i] = std::sqrt(d);
  }
  lt_ = Matrix(n, n);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j <= i; ++j) lt_(j, i) = l_(i, j);
  }
  return true;
}

void Cholesky::solve_lower(Vector& b) const {
  const std::size_t n = dim();
  assert(b.size() == n);
  const auto& ops = kernels::active();
  for (std::size_t i = 0; i < n; ++i) {
    const double* li = l_.row(i);
    b[i] = (b[i] - ops.dot(li, b.data(), i)) / li[i];
  }
}

void Cholesky::solve_lower_transpose(Vector& b) const {
  const std::size_t n = dim();
  assert(b.size() == n);
  const auto& ops = kernels::active();
  for (std::size_t i = n; i-- > 0;) {
    const double* ui = lt_.row(i);
    b[i] = (b[i] - ops.dot(ui + i + 1, b.data() + i + 1, n - i - 1)) / ui[i];
  }
}

void Cholesky::solve(Vector& b) const {
  solve_lower(b);
  solve_lower_transpose(b);
}

GramCholesky::GramCholesky(std::size_t capacity)
    : cap_(capacity), r_(capacity * capacity, 0.0), work_(capacity, 0.0) {}

bool GramCholesky::append(const Vector& gram_col, double diag, double dep_tol) {
  assert(k_ < cap_ && gram_col.size() >= k_);
  // Forward solve R^T t = gram_col over the current k x k triangle.
  Vector& t = work_;
  for (std::size_t i = 0; i < k_; ++i) {
    double s = gram_col[i];
    for (std::size_t j = 0; j < i; ++j) s -= r_[j * cap_ + i] * t[j];
    t[i] = s / r_[i * cap_ + i];
  }
  double res = diag;
  for (std::size_t j = 0; j < k_; ++j) res -= t[j] * t[j];
  if (!(res > dep_tol * std::max(diag, 1e-300)) || !std::isfinite(res)) {
    return false;
  }
  for (std::size_t j = 0; j < k_; ++j) r_[j * cap_ + k_] = t[j];
  r_[k_ * cap_ + k_] = std::sqrt(res);
  ++k_;
  return true;
}

void GramCholesky::remove(std::size_t index) {
  assert(index < k_);
  // Shift columns past `index` left, then chase the created subdiagonal with
  // Givens rotations on row pairs.
  for (std::size_t i = 0; i < k_; ++i) {
    double* row = r_.data() + i * cap_;
    for (std::size_t j = index; j + 1 < k_; ++j) row[j] = row[j + 1];
  }
  const auto& ops = kernels::active();
  for (std::size_t p = index; p + 1 < k_; ++p) {
    double* rp = r_.data() + p * cap_;
    double* rq = r_.data() + (p + 1) * cap_;
    const double a = rp[p];
    const double b = rq[p];
    const double r = std::hypot(a, b);
    if (r > 0.0) {
      const double c = a / r;
      const double s = b / r;
      rp[p] = r;
      rq[p] = 0.0;
      ops.rot(c, s, rp + p + 1, rq + p + 1, k_ - 2 - p);
    }
  }
  --k_;
}

void GramCholesky::solve(Vector& b) const {
  assert(b.size() == k_);
  // Forward R^T z = b (columns of R), then backward R x = z (rows of R).
  for (std::size_t i = 0; i < k_; ++i) {
    double s = b[i];
    for (std::size_t j = 0; j < i; ++j) s -= r_[j * cap_ + i] * b[j];
    b[i] = s / r_[i * cap_ + i];
  }
  const auto& ops = kernels::active();
  for (std::size_t i = k_; i-- > 0;) {
    const double* ri = r_.data() + i * cap_;
    b[i] = (b[i] - ops.dot(ri + i + 1, b.data() + i + 1, k_ - i - 1)) / ri[i];
  }
}

}  // namespace lcqp
