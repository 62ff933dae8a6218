#ifndef LATTICEME_BASELINE_HPP
#define LATTICEME_BASELINE_HPP

#include <span>
#include <vector>

#include "latticeme/chain.hpp"
#include "latticeme/detect.hpp"
#include "latticeme/hier.hpp"
#include "latticeme/lattice.hpp"

// The two naive comparators with fixed detected locations: Bayesian linear
// regression on the pooled x/y displacements, with iid errors (simple) or
// the shared exponential covariance structure (spatial).

namespace latticeme {

struct BaselineData {
  std::vector<double> delta_x, delta_y;  // s_A - u per coordinate
  std::vector<double> psi_x, psi_y;      // w* - u per coordinate
  std::vector<Vec2> a_coords;            // detected A locations (distance matrix)
  int n_excluded = 0;                    // sites dropped for unconverged fits
};

// Assembles displacements and covariates from the detection output; the
// intensity weight is the fitted amplitude (peak height above background).
// Unconverged fits drop the affected A-sites, or throw under strict mode.
BaselineData build_baseline_data(const LatticeGeometry& geometry,
                                 std::span<const GaussianPeakFit> a_fits,
                                 std::span<const GaussianPeakFit> b_fits,
                                 bool strict = false);

enum class BaselineModel { simple, spatial };

struct BaselinePriors {
  double alpha_var = 1000.0 * 1000.0;
  double sigma2_a_shape = 0.01, sigma2_a_rate = 0.01;
  double rho_log_var = 10.0;  // LogNormal(0,10) for the baseline range
  double step_logit_r = 0.4;
  double step_log_rho = 0.6;
  AdaptConfig adapt;

  // Test hooks: start values and the option to freeze the correlation
  // parameters (a spatial run with r fixed at zero reproduces the simple
  // run's alpha draws).
  double init_r = 0.5;
  double init_rho = 0.0;  // 0 -> derived from the coordinate span
  bool update_corr = true;
};

ChainSet run_baseline(const BaselineData& data, BaselineModel model,
                      const BaselinePriors& priors, const McmcSchedule& schedule);

}  // namespace latticeme

#endif
