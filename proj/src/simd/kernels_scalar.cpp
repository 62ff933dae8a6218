#include <cmath>
#include <cstddef>

#include "latticeme/simd.hpp"
#include "exp_constants.hpp"

// Scalar reference kernels. These define the semantics the vector variants
// reproduce bit for bit; see simd.hpp for the arithmetic contract.

namespace latticeme::simd {
namespace {

using detail::exp_core;

// Reductions run 16 logical accumulators (lane l sees indices 16k+l) and
// combine as W[j] = (acc[j]+acc[j+4]) + (acc[j+8]+acc[j+12]), then
// ((W0+W1)+(W2+W3)) + tail. This matches four 4-wide vector accumulators.
struct Acc16 {
  double a[16] = {};
  double finish(double tail) const {
    double w[4];
    for (int j = 0; j < 4; ++j) w[j] = (a[j] + a[j + 4]) + (a[j + 8] + a[j + 12]);
    return ((w[0] + w[1]) + (w[2] + w[3])) + tail;
  }
};

double dot_scalar(const double* a, const double* b, std::size_t n) {
  Acc16 acc;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16)
    for (std::size_t l = 0; l < 16; ++l)
      acc.a[l] = std::fma(a[i + l], b[i + l], acc.a[l]);
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail = std::fma(a[i], b[i], tail);
  return acc.finish(tail);
}

double sum_scalar(const double* x, std::size_t n) {
  Acc16 acc;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16)
    for (std::size_t l = 0; l < 16; ++l) acc.a[l] += x[i + l];
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail += x[i];
  return acc.finish(tail);
}

void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = std::fma(a, x[i], y[i]);
}

void vexp_scalar(const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] = exp_core(x[i]);
}

void gauss_weights_scalar(const double* px, const double* py, std::size_t n,
                          double cx, double cy, double scale, double* out) {
  for (std::size_t i = 0; i < n; ++i) {
    const double dx = px[i] - cx;
    const double dy = py[i] - cy;
    const double d2 = std::fma(dx, dx, dy * dy);
    out[i] = exp_core(d2 * scale);
  }
}

void scaled_exp_scalar(const double* d, std::size_t n, double scale_arg,
                       double scale_out, double* out) {
  for (std::size_t i = 0; i < n; ++i)
    out[i] = scale_out * exp_core(d[i] * scale_arg);
}

void residual_scalar(const double* y, double b0, double beta, const double* x,
                     double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::fma(-beta, x[i], y[i] - b0);
}

double resid_sq_norm_scalar(const double* sy, double b0, const double* so,
                            double beta, const double* sx, std::size_t n) {
  Acc16 acc;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16)
    for (std::size_t l = 0; l < 16; ++l) {
      double t = std::fma(-b0, so[i + l], sy[i + l]);
      t = std::fma(-beta, sx[i + l], t);
      acc.a[l] = std::fma(t, t, acc.a[l]);
    }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) {
    double t = std::fma(-b0, so[i], sy[i]);
    t = std::fma(-beta, sx[i], t);
    tail = std::fma(t, t, tail);
  }
  return acc.finish(tail);
}

}  // namespace

extern const KernelTable kScalarTable;
const KernelTable kScalarTable = {
    "scalar",          dot_scalar,      sum_scalar,
    axpy_scalar,       vexp_scalar,     gauss_weights_scalar,
    scaled_exp_scalar, residual_scalar, resid_sq_norm_scalar,
};

}  // namespace latticeme::simd
