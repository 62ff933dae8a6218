// NEON kernel variants for aarch64. Lane order and reduction trees mirror
// kernels_scalar.cpp exactly; a 4-wide logical vector is a pair of
// float64x2_t registers.

#if defined(__aarch64__)

#include <arm_neon.h>

#include <cstddef>

#include "latticeme/simd.hpp"
#include "exp_constants.hpp"

namespace latticeme::simd {
namespace {

using detail::exp_core;

inline float64x2_t exp2v(float64x2_t x) {
  const float64x2_t lo = vdupq_n_f64(detail::EXP_MIN_ARG);
  const float64x2_t hi = vdupq_n_f64(detail::EXP_MAX_ARG);
  const uint64x2_t ord = vceqq_f64(x, x);  // 0 where NaN

  float64x2_t xc = vmaxq_f64(lo, x);
  xc = vminq_f64(hi, xc);
  const float64x2_t k = vrndnq_f64(vmulq_f64(xc, vdupq_n_f64(detail::INV_LN2)));
  float64x2_t r = vfmaq_f64(xc, k, vdupq_n_f64(-detail::LN2_HI));
  r = vfmaq_f64(r, k, vdupq_n_f64(-detail::LN2_LO));

  float64x2_t p = vdupq_n_f64(detail::EXP_POLY[13]);
  for (int i = 12; i >= 0; --i)
    p = vfmaq_f64(vdupq_n_f64(detail::EXP_POLY[i]), p, r);

  const int64x2_t ki = vcvtq_s64_f64(k);  // k is integral, conversion exact
  const int64x2_t k1 = vshrq_n_s64(ki, 1);
  const int64x2_t k2 = vsubq_s64(ki, k1);
  const int64x2_t bias = vdupq_n_s64(1023);
  const float64x2_t s1 =
      vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(k1, bias), 52));
  const float64x2_t s2 =
      vreinterpretq_f64_s64(vshlq_n_s64(vaddq_s64(k2, bias), 52));
  const float64x2_t res = vmulq_f64(vmulq_f64(p, s1), s2);
  return vbslq_f64(ord, res, x);
}

struct VAcc {  // one 4-wide logical accumulator
  float64x2_t a, b;
};

inline VAcc vacc_zero() { return {vdupq_n_f64(0.0), vdupq_n_f64(0.0)}; }

inline VAcc vacc_fma(VAcc acc, const double* x, const double* y) {
  acc.a = vfmaq_f64(acc.a, vld1q_f64(x), vld1q_f64(y));
  acc.b = vfmaq_f64(acc.b, vld1q_f64(x + 2), vld1q_f64(y + 2));
  return acc;
}

inline double reduce4(VAcc v0, VAcc v1, VAcc v2, VAcc v3, double tail) {
  const float64x2_t wa =
      vaddq_f64(vaddq_f64(v0.a, v1.a), vaddq_f64(v2.a, v3.a));
  const float64x2_t wb =
      vaddq_f64(vaddq_f64(v0.b, v1.b), vaddq_f64(v2.b, v3.b));
  const double l0 = vgetq_lane_f64(wa, 0);
  const double l1 = vgetq_lane_f64(wa, 1);
  const double l2 = vgetq_lane_f64(wb, 0);
  const double l3 = vgetq_lane_f64(wb, 1);
  return ((l0 + l1) + (l2 + l3)) + tail;
}

double dot_neon(const double* a, const double* b, std::size_t n) {
  VAcc v0 = vacc_zero(), v1 = vacc_zero(), v2 = vacc_zero(), v3 = vacc_zero();
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    v0 = vacc_fma(v0, a + i, b + i);
    v1 = vacc_fma(v1, a + i + 4, b + i + 4);
    v2 = vacc_fma(v2, a + i + 8, b + i + 8);
    v3 = vacc_fma(v3, a + i + 12, b + i + 12);
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail = __builtin_fma(a[i], b[i], tail);
  return reduce4(v0, v1, v2, v3, tail);
}

double sum_neon(const double* x, std::size_t n) {
  VAcc v0 = vacc_zero(), v1 = vacc_zero(), v2 = vacc_zero(), v3 = vacc_zero();
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    v0.a = vaddq_f64(v0.a, vld1q_f64(x + i));
    v0.b = vaddq_f64(v0.b, vld1q_f64(x + i + 2));
    v1.a = vaddq_f64(v1.a, vld1q_f64(x + i + 4));
    v1.b = vaddq_f64(v1.b, vld1q_f64(x + i + 6));
    v2.a = vaddq_f64(v2.a, vld1q_f64(x + i + 8));
    v2.b = vaddq_f64(v2.b, vld1q_f64(x + i + 10));
    v3.a = vaddq_f64(v3.a, vld1q_f64(x + i + 12));
    v3.b = vaddq_f64(v3.b, vld1q_f64(x + i + 14));
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) tail += x[i];
  return reduce4(v0, v1, v2, v3, tail);
}

void axpy_neon(double a, const double* x, double* y, std::size_t n) {
  const float64x2_t av = vdupq_n_f64(a);
  const std::size_t nb = n & ~std::size_t(1);
  for (std::size_t i = 0; i < nb; i += 2)
    vst1q_f64(y + i, vfmaq_f64(vld1q_f64(y + i), av, vld1q_f64(x + i)));
  if (nb < n) y[nb] = __builtin_fma(a, x[nb], y[nb]);
}

void vexp_neon(const double* x, double* y, std::size_t n) {
  const std::size_t nb = n & ~std::size_t(1);
  for (std::size_t i = 0; i < nb; i += 2)
    vst1q_f64(y + i, exp2v(vld1q_f64(x + i)));
  if (nb < n) y[nb] = exp_core(x[nb]);
}

void gauss_weights_neon(const double* px, const double* py, std::size_t n,
                        double cx, double cy, double scale, double* out) {
  const float64x2_t cxv = vdupq_n_f64(cx);
  const float64x2_t cyv = vdupq_n_f64(cy);
  const float64x2_t sv = vdupq_n_f64(scale);
  const std::size_t nb = n & ~std::size_t(1);
  for (std::size_t i = 0; i < nb; i += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(px + i), cxv);
    const float64x2_t dy = vsubq_f64(vld1q_f64(py + i), cyv);
    const float64x2_t d2 = vfmaq_f64(vmulq_f64(dy, dy), dx, dx);
    vst1q_f64(out + i, exp2v(vmulq_f64(d2, sv)));
  }
  if (nb < n) {
    const double dx = px[nb] - cx;
    const double dy = py[nb] - cy;
    out[nb] = exp_core(__builtin_fma(dx, dx, dy * dy) * scale);
  }
}

void scaled_exp_neon(const double* d, std::size_t n, double scale_arg,
                     double scale_out, double* out) {
  const float64x2_t sa = vdupq_n_f64(scale_arg);
  const float64x2_t so = vdupq_n_f64(scale_out);
  const std::size_t nb = n & ~std::size_t(1);
  for (std::size_t i = 0; i < nb; i += 2) {
    const float64x2_t e = exp2v(vmulq_f64(vld1q_f64(d + i), sa));
    vst1q_f64(out + i, vmulq_f64(so, e));
  }
  if (nb < n) out[nb] = scale_out * exp_core(d[nb] * scale_arg);
}

void residual_neon(const double* y, double b0, double beta, const double* x,
                   double* out, std::size_t n) {
  const float64x2_t b0v = vdupq_n_f64(b0);
  const float64x2_t nbeta = vdupq_n_f64(-beta);
  const std::size_t nb = n & ~std::size_t(1);
  for (std::size_t i = 0; i < nb; i += 2) {
    const float64x2_t t = vsubq_f64(vld1q_f64(y + i), b0v);
    vst1q_f64(out + i, vfmaq_f64(t, nbeta, vld1q_f64(x + i)));
  }
  if (nb < n) out[nb] = __builtin_fma(-beta, x[nb], y[nb] - b0);
}

double resid_sq_norm_neon(const double* sy, double b0, const double* so,
                          double beta, const double* sx, std::size_t n) {
  const float64x2_t nb0 = vdupq_n_f64(-b0);
  const float64x2_t nbeta = vdupq_n_f64(-beta);
  VAcc v[4] = {vacc_zero(), vacc_zero(), vacc_zero(), vacc_zero()};
  const std::size_t nb = n & ~std::size_t(15);
  for (std::size_t i = 0; i < nb; i += 16) {
    for (int g = 0; g < 4; ++g) {
      const std::size_t o = i + 4 * static_cast<std::size_t>(g);
      float64x2_t ta = vfmaq_f64(vld1q_f64(sy + o), nb0, vld1q_f64(so + o));
      float64x2_t tb =
          vfmaq_f64(vld1q_f64(sy + o + 2), nb0, vld1q_f64(so + o + 2));
      ta = vfmaq_f64(ta, nbeta, vld1q_f64(sx + o));
      tb = vfmaq_f64(tb, nbeta, vld1q_f64(sx + o + 2));
      v[g].a = vfmaq_f64(v[g].a, ta, ta);
      v[g].b = vfmaq_f64(v[g].b, tb, tb);
    }
  }
  double tail = 0.0;
  for (std::size_t i = nb; i < n; ++i) {
    double t = __builtin_fma(-b0, so[i], sy[i]);
    t = __builtin_fma(-beta, sx[i], t);
    tail = __builtin_fma(t, t, tail);
  }
  return reduce4(v[0], v[1], v[2], v[3], tail);
}

}  // namespace

extern const KernelTable kNeonTable;
const KernelTable kNeonTable = {
    "neon",          dot_neon,      sum_neon,
    axpy_neon,       vexp_neon,     gauss_weights_neon,
    scaled_exp_neon, residual_neon, resid_sq_norm_neon,
};

}  // namespace latticeme::simd

#endif  // aarch64
