#ifndef LATTICEME_SIMD_HPP
#define LATTICEME_SIMD_HPP

#include <cstddef>
#include <string>
#include <vector>

// Runtime-dispatched arithmetic kernels.
//
// Every kernel has a scalar reference implementation and, where the build
// target supports it, an AVX2 (x86-64) or NEON (aarch64) variant. All
// variants of a kernel implement the *same* arithmetic, lane for lane, so
// their results are bit-identical:
//
//  * reductions (dot, sum, resid_sq_norm) run sixteen independent lane
//    accumulators over blocks of sixteen elements (lane l sees indices
//    16k+l, accumulated with fused multiply-add), the remainder goes into a
//    sequential tail accumulator, and the lanes combine in the fixed order
//    documented in kernels_scalar.cpp;
//  * maps (axpy, residual, vexp, gauss_weights, scaled_exp) are elementwise
//    with explicit fma;
//  * the exponential uses one fixed algorithm (Cody-Waite reduction against
//    ln 2, degree-11 Horner polynomial, exponent reconstruction in two
//    halves) in all variants.
//
// The active table is chosen once per process from CPU capabilities, or
// forced via the LATTICEME_SIMD environment variable ("scalar", "avx2",
// "neon", "auto").

namespace latticeme::simd {

enum class Backend { scalar, avx2, neon };

struct KernelTable {
  const char* name;

  // sum_i a[i]*b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);
  // sum_i x[i]
  double (*sum)(const double* x, std::size_t n);
  // y[i] += a*x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  // y[i] = exp(x[i])
  void (*vexp)(const double* x, double* y, std::size_t n);
  // out[k] = exp(scale * ((px[k]-cx)^2 + (py[k]-cy)^2)), scale typically -1/(2 psi^2)
  void (*gauss_weights)(const double* px, const double* py, std::size_t n,
                        double cx, double cy, double scale, double* out);
  // out[k] = scale_out * exp(d[k] * scale_arg)
  void (*scaled_exp)(const double* d, std::size_t n, double scale_arg,
                     double scale_out, double* out);
  // out[k] = (y[k] - b0) - beta*x[k]
  void (*residual)(const double* y, double b0, double beta, const double* x,
                   double* out, std::size_t n);
  // sum_k (sy[k] - b0*so[k] - beta*sx[k])^2
  double (*resid_sq_norm)(const double* sy, double b0, const double* so,
                          double beta, const double* sx, std::size_t n);
};

// Active table (selected on first use, stable afterwards).
const KernelTable& kernels();
Backend active_backend();

// Specific table, or nullptr when the backend is not compiled in / the CPU
// lacks the feature. Used by the equivalence tests.
const KernelTable* kernel_table(Backend b);
std::vector<Backend> available_backends();

// Force a backend before first use (tests, --simd CLI flag). Throws
// std::runtime_error if unavailable.
void force_backend(Backend b);
Backend parse_backend(const std::string& name);
const char* backend_name(Backend b);

}  // namespace latticeme::simd

#endif
