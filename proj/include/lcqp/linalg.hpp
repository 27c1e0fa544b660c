#pragma once

#include <cstddef>
#include <vector>

#include "lcqp/kernels.hpp"

// Dense row-major linear algebra built on the kernel layer. Sized for the
// moderate dimensions this project targets (hundreds to a few thousand
// variables); no sparsity is exploited.

namespace lcqp {

using Vector = std::vector<double>;

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

  static Matrix identity(std::size_t n);

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  double* row(std::size_t i) { return data_.data() + i * cols_; }
  const double* row(std::size_t i) const { return data_.data() + i * cols_; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  bool empty() const { return data_.empty(); }

  double* data() { return data_.data(); }
  const double* data() const { return data_.data(); }

  bool operator==(const Matrix& other) const = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  Vector data_;
};

// Thin vector wrappers over the active kernel backend.
double dot(const Vector& x, const Vector& y);
double norm_inf(const Vector& x);
void axpy(double a, const Vector& x, Vector& y);
void scal(double a, Vector& x);

// y = A x and y = A^T x; y is resized to fit.
void matvec(const Matrix& a, const Vector& x, Vector& y);
void matvec_transpose(const Matrix& a, const Vector& x, Vector& y);

// x^T A x
double quad_form(const Matrix& a, const Vector& x);

// Cholesky factorization Q = L L^T of a symmetric positive definite matrix.
// The transpose is stored as well so both triangular solves run on
// contiguous rows.
class Cholesky {
 public:
  // Returns false when a nonpositive (or non-finite) pivot arises, i.e. the
  // matrix is not positive definite to working precision.
  bool factorize(const Matrix& q);

  std::size_t dim() const { return l_.rows(); }
  const Matrix& lower() const { return l_; }

  void solve_lower(Vector& b) const;            // L z = b
  void solve_lower_transpose(Vector& b) const;  // L^T z = b
  void solve(Vector& b) const;                  // L L^T z = b

 private:
  Matrix l_;   // lower triangle
  Matrix lt_;  // its transpose
};

// Maintains the upper-triangular factor R with R^T R = G for a Gram matrix
// G that grows by one row/column at a time and shrinks by deleting an
// arbitrary index. Appends cost O(k^2), deletions restore triangularity with
// a Givens sweep. Backbone of the Schur-complement system in the active-set
// solver: G holds inner products of working-set rows in the Q^-1 metric.
class GramCholesky {
 public:
  explicit GramCholesky(std::size_t capacity);

  std::size_t size() const { return k_; }
  std::size_t capacity() const { return cap_; }

  // Appends index k = size(). gram_col[i] = <w_new, w_i> for i < k and
  // diag = <w_new, w_new>. Fails (returning false, factor unchanged) when
  // the new row is linearly dependent on the current set: the squared
  // residual norm falls at or below dep_tol * diag.
  bool append(const Vector& gram_col, double diag, double dep_tol);

  void remove(std::size_t index);

  // (R^T R) z = b in place; b has length size().
  void solve(Vector& b) const;

  void clear() { k_ = 0; }

 private:
  std::size_t cap_ = 0;
  std::size_t k_ = 0;
  Vector r_;  // cap x cap row-major; leading k x k upper triangle valid
  mutable Vector work_;
};

}  // namespace lcqp
