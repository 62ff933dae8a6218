#include "latticeme/linalg.hpp"

#include <cmath>
#include <cstring>

#include "latticeme/simd.hpp"

namespace latticeme {

Cholesky Cholesky::compute(const Matrix& a) {
  const auto& k = simd::kernels();
  const std::size_t n = a.rows();
  if (n == 0 || a.cols() != n) throw DomainError("Cholesky: matrix must be square and non-empty");

  Cholesky f;
  f.n_ = n;
  f.lw_.resize(n * (n + 1) / 2);
  double log_det = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    double* ri = f.lw_.data() + i * (i + 1) / 2;
    for (std::size_t j = 0; j <= i; ++j) {
      const double* rj = f.lw_.data() + j * (j + 1) / 2;
      const double s = a(i, j) - k.dot(ri, rj, j);
      if (j < i) {
        ri[j] = s / rj[j];
      } else {
        if (!(s > 0.0))
          throw FactorizationError("Cholesky: matrix not positive definite", static_cast<int>(i));
        ri[i] = std::sqrt(s);
        log_det += 2.0 * std::log(ri[i]);
      }
    }
  }
  f.log_det_ = log_det;
  return f;
}

void Cholesky::solve_lower(double* b) const {
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < n_; ++i) {
    const double* ri = lw_.data() + i * (i + 1) / 2;
    b[i] = (b[i] - k.dot(ri, b, i)) / ri[i];
  }
}

void Cholesky::solve_lower_t(double* b) const {
  const auto& k = simd::kernels();
  for (std::size_t i = n_; i-- > 0;) {
    const double* ri = lw_.data() + i * (i + 1) / 2;
    b[i] /= ri[i];
    k.axpy(-b[i], ri, b, i);
  }
}

void Cholesky::solve(double* b) const {
  solve_lower(b);
  solve_lower_t(b);
}

double Cholesky::quad_inv(const double* v, double* work) const {
  std::memcpy(work, v, n_ * sizeof(double));
  solve_lower(work);
  return simd::kernels().dot(work, work, n_);
}

void Cholesky::mul_lower(const double* z, double* out) const {
  const auto& k = simd::kernels();
  for (std::size_t i = n_; i-- > 0;) {
    const double* ri = lw_.data() + i * (i + 1) / 2;
    out[i] = k.dot(ri, z, i + 1);
  }
}

void Cholesky::rescale(double c) {
  if (!(c > 0.0)) throw DomainError("Cholesky::rescale: factor must be positive");
  const double s = std::sqrt(c);
  for (double& v : lw_) v *= s;
  log_det_ += static_cast<double>(n_) * std::log(c);
}

}  // namespace latticeme
