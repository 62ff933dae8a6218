#ifndef LATTICEME_SIMD_EXP_CONSTANTS_HPP
#define LATTICEME_SIMD_EXP_CONSTANTS_HPP

#include <bit>
#include <cmath>
#include <cstdint>

// Shared pieces of the fixed exp algorithm. Every backend performs, in this
// order:
//   xc = clamp(x, EXP_MIN_ARG, EXP_MAX_ARG)        (NaN lanes patched at end)
//   k  = nearbyint(xc * INV_LN2)                   (ties to even)
//   r  = fma(k, -LN2_HI, xc); r = fma(k, -LN2_LO, r)
//   p  = Horner fma over EXP_POLY (degree 11, coefficients 1/i!)
//   k1 = k >> 1 (arithmetic), k2 = k - k1
//   result = (p * 2^k1) * 2^k2
// The two-half exponent reconstruction keeps 2^k1 and 2^k2 inside the normal
// range for every clamped input, covering gradual underflow and overflow to
// inf without special cases. Vector backends use exp_core for loop tails.

namespace latticeme::simd::detail {

inline constexpr double EXP_MIN_ARG = -746.0;
inline constexpr double EXP_MAX_ARG = 710.0;
inline constexpr double INV_LN2 = 1.4426950408889634074;    // 1/ln 2
inline constexpr double LN2_HI = 6.93147180369123816490e-01;
inline constexpr double LN2_LO = 1.90821492927058770002e-10;

// 1/i!, i = 0..13
inline constexpr double EXP_POLY[14] = {
    1.0,
    1.0,
    0.5,
    1.0 / 6.0,
    1.0 / 24.0,
    1.0 / 120.0,
    1.0 / 720.0,
    1.0 / 5040.0,
    1.0 / 40320.0,
    1.0 / 362880.0,
    1.0 / 3628800.0,
    1.0 / 39916800.0,
    1.0 / 479001600.0,
    1.0 / 6227020800.0,
};

inline double pow2i(std::int64_t k) {
  // k stays in [-538, 513] thanks to the two-half split.
  return std::bit_cast<double>(static_cast<std::uint64_t>(k + 1023) << 52);
}

inline double exp_core(double x) {
  if (std::isnan(x)) return x;
  double xc = x < EXP_MIN_ARG ? EXP_MIN_ARG : x;
  xc = xc > EXP_MAX_ARG ? EXP_MAX_ARG : xc;
  const double k = std::nearbyint(xc * INV_LN2);
  double r = std::fma(k, -LN2_HI, xc);
  r = std::fma(k, -LN2_LO, r);
  double p = EXP_POLY[13];
  for (int i = 12; i >= 0; --i) p = std::fma(p, r, EXP_POLY[i]);
  const auto ki = static_cast<std::int64_t>(k);
  const std::int64_t k1 = ki >> 1;
  const std::int64_t k2 = ki - k1;
  return (p * pow2i(k1)) * pow2i(k2);
}

}  // namespace latticeme::simd::detail

#endif
