#ifndef LATTICEME_LINALG_HPP
#define LATTICEME_LINALG_HPP

#include <cmath>
#include <cstddef>
#include <vector>

#include "latticeme/errors.hpp"

// Small dense linear algebra for covariance work (n up to a few hundred).
// Inner loops run on the runtime-dispatched simd kernels; the triangular
// factor is stored packed row-major so both the dot-form forward solve and
// the axpy-form backward solve walk contiguous memory.

namespace latticeme {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

inline Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
inline Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
inline Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
inline double dist(Vec2 a, Vec2 b) { return std::hypot(a.x - b.x, a.y - b.y); }

class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), v_(rows * cols, 0.0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  double& operator()(std::size_t i, std::size_t j) { return v_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return v_[i * cols_ + j]; }
  double* row(std::size_t i) { return v_.data() + i * cols_; }
  const double* row(std::size_t i) const { return v_.data() + i * cols_; }
  double* data() { return v_.data(); }
  const double* data() const { return v_.data(); }

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<double> v_;
};

class Cholesky {
 public:
  Cholesky() = default;

  // Factor a symmetric positive definite matrix; throws FactorizationError
  // carrying the failing pivot index otherwise.
  static Cholesky compute(const Matrix& a);

  std::size_t dim() const { return n_; }
  double log_det() const { return log_det_; }

  // In-place triangular solves.
  void solve_lower(double* b) const;    // L x = b
  void solve_lower_t(double* b) const;  // L^T x = b
  void solve(double* b) const;          // A x = b

  // v^T A^{-1} v through one forward solve; work must hold dim() doubles.
  double quad_inv(const double* v, double* work) const;

  // out = L z (sampling transform).
  void mul_lower(const double* z, double* out) const;

  // A -> c*A without refactorizing.
  void rescale(double c);

  double diag(std::size_t i) const { return lw_[i * (i + 1) / 2 + i]; }
  const double* packed_row(std::size_t i) const { return lw_.data() + i * (i + 1) / 2; }

 private:
  std::size_t n_ = 0;
  std::vector<double> lw_;  // packed row-major lower triangle
  double log_det_ = 0.0;
};

}  // namespace latticeme

#endif
