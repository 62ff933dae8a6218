// AVX2+FMA kernel variants. Compiled with -mavx2 -mfma on x86-64 only;
// selected at runtime after a cpuid check (see dispatch.cpp). Lane order and
// reduction trees mirror kernels_scalar.cpp exactly.

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cstddef>

#include "latticeme/simd.hpp"
#include "exp_constants.hpp"

namespace latticeme::simd {
namespace {

using detail::exp_core;

inline __m256d exp4(__m256d x) {
  const __m256d lo = _mm256_set1_pd(detail::EXP_MIN_ARG);
  const __m256d hi = _mm256_set1_pd(detail::EXP_MAX_ARG);
  const __m256d nan_mask = _mm256_cmp_pd(x, x, _CMP_UNORD_Q);

  __m256d xc = _mm256_max_pd(lo, x);
  xc = _mm256_min_pd(hi, xc);
  const __m256d k =
      _mm256_round_pd(_mm256_mul_pd(xc, _mm256_set1_pd(detail::INV_LN2)),
                      _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fmadd_pd(k, _mm256_set1_pd(-detail::LN2_HI), xc);
  r = _mm256_fmadd_pd(k, _mm256_set1_pd(-detail::LN2_LO), r);

  __m256d p = _mm256_set1_pd(detail::EXP_POLY[13]);
  for (int i = 12; i >= 0; --i)
    p = _mm256_fmadd_pd(p, r, _mm256_set1_pd(detail::EXP_POLY[i]));

  const __m128i ki = _mm256_cvtpd_epi32(k);  // k is integral, conversion exact
  const __m128i k1 = _mm_srai_epi32(ki, 1);
  const __m128i k2 = _mm_sub_epi32(ki, k1);
  const __m256i bias = _mm256_set1_epi64x(1023);
  const __m256d s1 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k1), bias), 52));
  const __m256d s2 = _mm256_castsi256_pd(_mm256_slli_epi64(
      _mm256_add_epi64(_mm256_cvtepi32_epi64(k2), bias), 52));
  const __m256d res = _mm256_mul_pd(_mm256_mul_pd(p, s1), s2);
  return _mm256_blendv_pd(res, x, nan_mask);
}

// Combine four vector accumulators and four lanes in the scalar order:
// W = (v0+v1)+(v2+v3); total = ((W0+W1)+(W2+W3)) + tail.
inline double reduce4(__m256d v0, __m256d v1, __m256d v2, __m256d v3,
                      double tail) {
  const __m256d w =
      _mm256_add_pd(_mm256_add_pd(v0, v1), _mm256_add_pd(v2, v3));
  alignas(32) double lanes[4];
  _mm256_store_pd(lanes, w);
  return ((lanes[0] + lanes[1]) + (lanes[2] + lanes[3])) + tail;
}

double dot_avx2(const double* a, const double* b, std::size_t n) {
  __m256d v0 = _mm256_setzero_pd(), v1 = v0, v2 = v0, v3 = v0;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    v0 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i), _mm256_loadu_pd(b + i), v0);
    v1 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 4), _mm256_loadu_pd(b + i + 4), v1);
    v2 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 8), _mm256_loadu_pd(b + i + 8), v2);
    v3 = _mm256_fmadd_pd(_mm256_loadu_pd(a + i + 12), _mm256_loadu_pd(b + i + 12), v3);
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail = __builtin_fma(a[i], b[i], tail);
  return reduce4(v0, v1, v2, v3, tail);
}

double sum_avx2(const double* x, std::size_t n) {
  __m256d v0 = _mm256_setzero_pd(), v1 = v0, v2 = v0, v3 = v0;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    v0 = _mm256_add_pd(v0, _mm256_loadu_pd(x + i));
    v1 = _mm256_add_pd(v1, _mm256_loadu_pd(x + i + 4));
    v2 = _mm256_add_pd(v2, _mm256_loadu_pd(x + i + 8));
    v3 = _mm256_add_pd(v3, _mm256_loadu_pd(x + i + 12));
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail += x[i];
  return reduce4(v0, v1, v2, v3, tail);
}

void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d av = _mm256_set1_pd(a);
  const std::size_t nb = n & ~std::size_t(3);
  for (std::size_t i = 0; i < nb; i += 4) {
    const __m256d r =
        _mm256_fmadd_pd(av, _mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    _mm256_storeu_pd(y + i, r);
  }
  for (std::size_t i = nb; i < n; ++i) y[i] = __builtin_fma(a, x[i], y[i]);
}

void vexp_avx2(const double* x, double* y, std::size_t n) {
  const std::size_t nb = n & ~std::size_t(3);
  for (std::size_t i = 0; i < nb; i += 4)
    _mm256_storeu_pd(y + i, exp4(_mm256_loadu_pd(x + i)));
  for (std::size_t i = nb; i < n; ++i) y[i] = exp_core(x[i]);
}

void gauss_weights_avx2(const double* px, const double* py, std::size_t n,
                        double cx, double cy, double scale, double* out) {
  const __m256d cxv = _mm256_set1_pd(cx);
  const __m256d cyv = _mm256_set1_pd(cy);
  const __m256d sv = _mm256_set1_pd(scale);
  const std::size_t nb = n & ~std::size_t(3);
  for (std::size_t i = 0; i < nb; i += 4) {
    const __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(px + i), cxv);
    const __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(py + i), cyv);
    const __m256d d2 = _mm256_fmadd_pd(dx, dx, _mm256_mul_pd(dy, dy));
    _mm256_storeu_pd(out + i, exp4(_mm256_mul_pd(d2, sv)));
  }
  for (std::size_t i = nb; i < n; ++i) {
    const double dx = px[i] - cx;
    const double dy = py[i] - cy;
    out[i] = exp_core(__builtin_fma(dx, dx, dy * dy) * scale);
  }
}

void scaled_exp_avx2(const double* d, std::size_t n, double scale_arg,
                     double scale_out, double* out) {
  const __m256d sa = _mm256_set1_pd(scale_arg);
  const __m256d so = _mm256_set1_pd(scale_out);
  const std::size_t nb = n & ~std::size_t(3);
  for (std::size_t i = 0; i < nb; i += 4) {
    const __m256d e = exp4(_mm256_mul_pd(_mm256_loadu_pd(d + i), sa));
    _mm256_storeu_pd(out + i, _mm256_mul_pd(so, e));
  }
  for (std::size_t i = nb; i < n; ++i)
    out[i] = scale_out * exp_core(d[i] * scale_arg);
}

void residual_avx2(const double* y, double b0, double beta, const double* x,
                   double* out, std::size_t n) {
  const __m256d b0v = _mm256_set1_pd(b0);
  const __m256d nbeta = _mm256_set1_pd(-beta);
  const std::size_t nb = n & ~std::size_t(3);
  for (std::size_t i = 0; i < nb; i += 4) {
    const __m256d t = _mm256_sub_pd(_mm256_loadu_pd(y + i), b0v);
    _mm256_storeu_pd(out + i, _mm256_fmadd_pd(nbeta, _mm256_loadu_pd(x + i), t));
  }
  for (std::size_t i = nb; i < n; ++i)
    out[i] = __builtin_fma(-beta, x[i], y[i] - b0);
}

double resid_sq_norm_avx2(const double* sy, double b0, const double* so,
                          double beta, const double* sx, std::size_t n) {
  const __m256d nb0 = _mm256_set1_pd(-b0);
  const __m256d nbeta = _mm256_set1_pd(-beta);
  __m256d v0 = _mm256_setzero_pd(), v1 = v0, v2 = v0, v3 = v0;
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    __m256d t0 = _mm256_fmadd_pd(nb0, _mm256_loadu_pd(so + i), _mm256_loadu_pd(sy + i));
    __m256d t1 = _mm256_fmadd_pd(nb0, _mm256_loadu_pd(so + i + 4), _mm256_loadu_pd(sy + i + 4));
    __m256d t2 = _mm256_fmadd_pd(nb0, _mm256_loadu_pd(so + i + 8), _mm256_loadu_pd(sy + i + 8));
    __m256d t3 = _mm256_fmadd_pd(nb0, _mm256_loadu_pd(so + i + 12), _mm256_loadu_pd(sy + i + 12));
    t0 = _mm256_fmadd_pd(nbeta, _mm256_loadu_pd(sx + i), t0);
    t1 = _mm256_fmadd_pd(nbeta, _mm256_loadu_pd(sx + i + 4), t1);
    t2 = _mm256_fmadd_pd(nbeta, _mm256_loadu_pd(sx + i + 8), t2);
    t3 = _mm256_fmadd_pd(nbeta, _mm256_loadu_pd(sx + i + 12), t3);
    v0 = _mm256_fmadd_pd(t0, t0, v0);
    v1 = _mm256_fmadd_pd(t1, t1, v1);
    v2 = _mm256_fmadd_pd(t2, t2, v2);
    v3 = _mm256_fmadd_pd(t3, t3, v3);
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) {
    double t = __builtin_fma(-b0, so[i], sy[i]);
    t = __builtin_fma(-beta, sx[i], t);
    tail = __builtin_fma(t, t, tail);
  }
  return reduce4(v0, v1, v2, v3, tail);
}

}  // namespace

extern const KernelTable kAvx2Table;
const KernelTable kAvx2Table = {
    "avx2",          dot_avx2,      sum_avx2,
    axpy_avx2,       vexp_avx2,     gauss_weights_avx2,
    scaled_exp_avx2, residual_avx2, resid_sq_norm_avx2,
};

}  // namespace latticeme::simd

#endif  // x86-64
