#ifndef LATTICEME_COVARIANCE_HPP
#define LATTICEME_COVARIANCE_HPP

#include <span>
#include <vector>

#include "latticeme/errors.hpp"
#include "latticeme/linalg.hpp"
#include "latticeme/rng.hpp"

// Exponential covariance with nugget:
//   C(p, p') = sigma2 * [ (1-r) 1{p=p'} + r exp(-|p-p'| / rho) ].
// The same structure serves the pixel layer, the process layer, and the
// variogram model gamma(d) = sigma2 - sigma2 * r * exp(-d/rho).

namespace latticeme {

struct ExpCovParams {
  double sigma2 = 1.0;
  double r = 0.5;    // proportion of variance that is spatial, in [0,1]
  double rho = 1.0;  // spatial range, pixels

  void validate() const;
};

Matrix distance_matrix(std::span<const Vec2> coords);

// Covariance from a precomputed distance matrix (exactly symmetric).
Matrix exp_cov_from_dist(const Matrix& dist, const ExpCovParams& p);
Matrix exp_cov_matrix(std::span<const Vec2> coords, const ExpCovParams& p);

// The factor type of the block likelihood; see linalg.hpp.
using CovFactor = Cholesky;
CovFactor factorize(const Matrix& cov);

// v^T C^{-1} v and u^T C^{-1} v via triangular solves; no explicit inverse.
double quad_form(const CovFactor& f, std::span<const double> v);
double bilinear_form(const CovFactor& f, std::span<const double> u,
                     std::span<const double> v);

std::vector<double> sample_mvn(std::span<const double> mean, const CovFactor& f,
                               Rng& rng);

struct VariogramEstimate {
  std::vector<double> bin_centers;   // strictly increasing
  std::vector<double> semivariances; // NaN marks an empty bin
  std::vector<long> counts;
};

// Classical Matheron estimator over equal-width distance bins.
VariogramEstimate empirical_variogram(std::span<const Vec2> coords,
                                      std::span<const double> residuals,
                                      int n_bins, double max_dist);

// Non-convergence carries the best parameters seen.
struct VariogramFitError : FitError {
  ExpCovParams best;
  VariogramFitError(const std::string& msg, ExpCovParams best_)
      : FitError(msg), best(best_) {}
};

// Pair-count-weighted least squares fit of the exponential variogram.
ExpCovParams fit_exp_variogram(const VariogramEstimate& vg);

// Model semivariance, for CSV output and tests.
double exp_variogram_value(const ExpCovParams& p, double d);

}  // namespace latticeme

#endif
