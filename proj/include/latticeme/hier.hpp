#ifndef LATTICEME_HIER_HPP
#define LATTICEME_HIER_HPP

#include <array>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "latticeme/chain.hpp"
#include "latticeme/covariance.hpp"
#include "latticeme/detect.hpp"
#include "latticeme/imaging.hpp"
#include "latticeme/lattice.hpp"
#include "latticeme/linalg.hpp"
#include "latticeme/rng.hpp"

// The full hierarchical MCMC over the block-approximate likelihood:
// conjugate Gibbs draws where the full conditionals are available,
// Metropolis updates for the B intensities (independence proposal from the
// data-layer conditional), site locations (random walk), bandwidths and
// correlation parameters (log / logit random walks), and optional
// spike-and-slab selection on the process slope.
//
// Windows are fixed for the whole chain; all windows of one type share a
// single pixel-pixel distance matrix, so each correlation update refactors
// exactly two covariance matrices regardless of the number of sites.

namespace latticeme {

struct HierData {
  LatticeGeometry geometry;
  std::vector<Window> a_windows;  // index = A-site index
  std::vector<Window> b_windows;  // index = B-site index
  Matrix dist_a;                  // A-A distances from geometry.a_means
  Matrix dist_win_a;              // window pixel-pixel distances, per type
  Matrix dist_win_b;

  int n_a() const { return static_cast<int>(a_windows.size()); }
  int n_b() const { return static_cast<int>(b_windows.size()); }
  long total_pixels() const;

  // Validates counts against the geometry and that windows are disjoint.
  static HierData build(LatticeGeometry geometry, std::vector<Window> a_windows,
                        std::vector<Window> b_windows);
};

struct HierState {
  double beta0 = 0.0;
  std::vector<double> beta_a, beta_b;
  double mu_beta_a = 0.0, mu_beta_b = 0.0;
  double var_beta_a = 1.0, var_beta_b = 1.0;  // sigma^2_beta_i
  double psi_a = 1.0, psi_b = 1.0;
  double sigma2 = 1.0;
  double r_pix = 0.5, rho_pix = 1.0;
  std::vector<Vec2> s_a, s_b;
  double alpha0 = 0.0, alpha1 = 0.0;
  double sigma2_a = 1.0, sigma2_b = 1.0;
  double r = 0.5, rho = 1.0;
  // Spike-and-slab decomposition alpha1 = gamma * eta when enabled.
  double gamma = 0.0;
  int eta = 1;

  // 3(N_A+N_B) + 16 scalar degrees of freedom.
  long dimension() const {
    return 3 * static_cast<long>(beta_a.size() + beta_b.size()) + 16;
  }
};

struct AdaptConfig {
  bool enabled = true;   // during burn-in only; frozen afterwards
  int batch = 50;
  double target = 0.35;  // aimed acceptance rate (30-45% band)
};

struct HierPriors {
  double beta0_var = 1000.0 * 1000.0;            // N(0, 1000^2)
  double mu_beta_prior_mean_a = 0.0;             // grounded at the OLS mean
  double mu_beta_prior_mean_b = 0.0;
  double mu_beta_var = 1000.0 * 1000.0;
  double sigma2_beta_prior_mean_a = 1.0;         // grounded at the OLS variance
  double sigma2_beta_prior_mean_b = 1.0;
  double sigma2_beta_prior_varscale = 625.0;     // the 25^2 knob; a_i = m/v0 + 2
  double psi_log_var = 100.0;                    // LogNormal(0,100), variance read
  double sigma2_shape = 0.01, sigma2_rate = 0.01;
  double rho_pix_log_var = 100.0;
  double alpha_var = 1000.0 * 1000.0;
  double sigma2_a_shape = 0.01, sigma2_a_rate = 0.01;
  double sigma2_b_shape = 0.01, sigma2_b_rate = 0.01;
  double rho_log_var = 100.0;

  bool ssvs = false;
  double ssvs_slab_sd = 10.0;
  double ssvs_prior_inclusion = 0.5;

  // Random-walk step sizes (starting points; adapted during burn-in).
  double step_loc_a = 0.05;
  double step_loc_b = 0.05;
  double step_log_psi = 0.005;
  double step_logit_r_pix = 0.05;
  double step_log_rho_pix = 0.05;
  double step_logit_r = 0.4;
  double step_log_rho = 0.6;
  AdaptConfig adapt;

  std::array<double, 2> beta_ig_shape_rate(SiteType t) const {
    const double m = t == SiteType::A ? sigma2_beta_prior_mean_a : sigma2_beta_prior_mean_b;
    const double v0 = sigma2_beta_prior_varscale;
    return {m / v0 + 2.0, m * (m / v0 + 1.0)};
  }
};

struct NormalParams {
  double mean = 0.0;
  double var = 1.0;
};
struct InvGammaParams {
  double shape = 1.0;
  double rate = 1.0;
};

class HierSampler {
 public:
  HierSampler(const HierData& data, const HierPriors& priors, HierState init,
              std::uint64_t seed);

  // One full sweep in the documented order: beta0, sigma2, beta_A, beta_B,
  // locations (A then B), process regression, process correlation, hyper,
  // bandwidths + pixel correlation, SSVS.
  void sweep();

  void update_beta0();
  void update_sigma2();
  void update_beta_a();
  void update_beta_b(bool hastings_correction = true);
  void update_locations_a();
  void update_locations_b();
  void update_process_regression();
  void update_process_corr();
  void update_hyper();
  void update_psi_and_pixel_corr();
  void update_ssvs();

  // Single-site / single-parameter moves (the block updates above loop over
  // these; the stationarity tests drive them in isolation).
  void update_beta_b_one(int j, bool hastings_correction = true);
  void update_location_one(SiteType t, int j);
  void update_psi_one(SiteType t);
  void update_r_pix();
  void update_rho_pix();
  void update_r();
  void update_rho();

  // Conditional parameters, exposed for the quadrature oracle tests.
  NormalParams beta0_conditional() const;
  NormalParams beta_a_conditional(int j) const;
  NormalParams beta_b_proposal(int j) const;  // data-layer-only conditional
  InvGammaParams sigma2_conditional() const;
  NormalParams alpha0_conditional() const;
  NormalParams alpha1_conditional() const;
  InvGammaParams sigma2_a_conditional() const;
  NormalParams mu_beta_conditional(SiteType t) const;
  InvGammaParams sigma2_beta_conditional(SiteType t) const;
  InvGammaParams sigma2_b_conditional() const;
  NormalParams ssvs_gamma_conditional() const;
  double ssvs_inclusion_probability() const;

  // Eq. 8 log likelihood over all windows under the current state.
  double block_loglik() const;
  // Process-layer log likelihood (both coordinates).
  double process_loglik() const;

  const HierState& state() const { return st_; }
  const HierData& data() const { return data_; }

  // Overwrite the state and rebuild every cache (tests, external edits).
  void set_state(const HierState& st);

  void set_adapting(bool on) { adapting_ = on; }
  std::map<std::string, double> acceptance_rates() const;

 private:
  struct TypeCache {
    CovFactor fac;            // sigma2 * [(1-r_pix)I + r_pix exp(-D/rho_pix)]
    std::vector<double> so;   // L^{-1} 1
    double oo = 0.0;          // so . so
  };
  struct WinCache {
    std::vector<double> x;   // kernel vector at (s, psi)
    std::vector<double> sx;  // L^{-1} x
    std::vector<double> sy;  // L^{-1} y
  };
  struct Tuner {
    double log_step = 0.0;
    long batch_accepts = 0;
    long batch_count = 0;
    long batch_index = 0;
  };

  const HierData& data_;
  HierPriors pr_;
  HierState st_;
  bool adapting_ = true;

  TypeCache tc_a_, tc_b_;
  std::vector<WinCache> wc_a_, wc_b_;
  CovFactor pfac_;             // process covariance factor (includes sigma2_a)
  std::vector<double> p_so_;   // Lv^{-1} 1
  double p_oo_ = 0.0;
  std::vector<double> delta_x_, delta_y_, psi_x_, psi_y_;
  double q_proc_ = 0.0;        // sum_l mu_l' V^{-1} mu_l at the current state

  std::map<std::string, Rng> rngs_;
  std::vector<Tuner> tune_loc_a_, tune_loc_b_;
  Tuner tune_psi_a_, tune_psi_b_, tune_r_pix_, tune_rho_pix_, tune_r_, tune_rho_;
  std::map<std::string, std::pair<long, long>> accept_;  // block -> (accepts, proposals)

  Rng& rng(const std::string& block);
  void rebuild_pixel_caches();
  void rebuild_window_vectors(SiteType t);
  void rebuild_process_cache();
  void rebuild_process_vectors();
  double recompute_q_proc();
  double window_ssq(SiteType t, int j) const;
  double window_ssq_with(SiteType t, int j, const std::vector<double>& sx) const;
  double process_quad_with(std::span<const double> mx, std::span<const double> my) const;
  void propose_tuned(Tuner& t, bool accepted, const std::string& block);
  void try_process_corr(double r_new, double rho_new, double log_prior_delta,
                        Tuner& tn, const char* block);
  void try_pixel_corr(double r_new, double rho_new, double log_prior_delta,
                      Tuner& tn, const char* block);
  double step_of(const Tuner& t) const;
  const Window& win(SiteType t, int j) const;
  WinCache& cache(SiteType t, int j);
  TypeCache& type_cache(SiteType t);
  const TypeCache& type_cache(SiteType t) const;
  void check_finite() const;
};

// Sweep driver with chain recording.
struct McmcSchedule {
  long iters = 4000;    // post burn-in draws before thinning
  long burn_in = 2000;
  int thin = 1;
  std::uint64_t seed = 1;
};

struct SiteSummary {
  int id = 0;
  SiteType type = SiteType::B;
  double mean_x = 0, mean_y = 0, sd_x = 0, sd_y = 0, cov_xy = 0;
  double beta_mean = 0, beta_sd = 0;
};

struct HierFitResult {
  ChainSet chains;
  std::vector<SiteSummary> sites;
};

HierFitResult run_hier_mcmc(const HierData& data, const HierPriors& priors,
                            const HierState& init, const McmcSchedule& schedule);

// Initial values from the detection pass, plus OLS grounding of the
// beta hyperpriors.
HierState initial_state_from_fits(const HierData& data,
                                  std::span<const GaussianPeakFit> a_fits,
                                  std::span<const GaussianPeakFit> b_fits);
void ground_priors_from_fits(HierPriors& priors,
                             std::span<const GaussianPeakFit> a_fits,
                             std::span<const GaussianPeakFit> b_fits);

}  // namespace latticeme

#endif
