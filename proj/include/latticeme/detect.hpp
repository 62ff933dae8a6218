#ifndef LATTICEME_DETECT_HPP
#define LATTICEME_DETECT_HPP

#include <span>
#include <vector>

#include "latticeme/imaging.hpp"
#include "latticeme/linalg.hpp"

// Initial atom-column location and intensity estimation: intensity-weighted
// centroid, then damped Gauss-Newton least squares on the rotated
// anisotropic Gaussian
//   g(x,y) = A exp(-[u^2/sigma1^2 + v^2/sigma2^2]) + Z,
//   u = (x-x0) cos t + (y-y0) sin t,  v = (x-x0) sin t - (y-y0) cos t.
// Both quadratic terms penalize distance from the center.

namespace latticeme {

struct GaussianPeakFit {
  double amplitude = 0.0;  // A, peak height above background
  Vec2 center;             // (x0, y0), sub-pixel
  double theta = 0.0;      // radians, canonicalized with sigma1 >= sigma2
  double sigma1 = 0.0;
  double sigma2 = 0.0;
  double background = 0.0;  // Z
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};

// Centroid of floor-subtracted intensities; throws DomainError when the
// window is constant.
Vec2 weighted_centroid(const Window& w);

GaussianPeakFit fit_gaussian_peak(const Window& w);

struct TraceDiagnostic {
  std::vector<double> offsets;  // -h..h
  std::vector<double> mean_horizontal, mean_vertical;
  std::vector<double> fit_horizontal, fit_vertical;
  double corr_horizontal = 0.0;  // NaN when undefined
  double corr_vertical = 0.0;
};

// Mean center-row / center-column profiles across equal-size windows, with a
// 1-D Gaussian least-squares fit of each mean and the Pearson correlation
// between mean and fit.
TraceDiagnostic trace_diagnostic(std::span<const Window> windows);

}  // namespace latticeme

#endif
