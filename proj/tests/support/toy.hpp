#ifndef LATTICEME_TESTS_TOY_HPP
#define LATTICEME_TESTS_TOY_HPP

#include <vector>

#include "latticeme/hier.hpp"
#include "latticeme/pipeline.hpp"
#include "latticeme/simulate.hpp"

// Tiny instances for the oracle suites: a 2x2 B grid (4 B + 1 A sites) with
// half-width-2 windows (25 pixels each), simulated at gentle noise levels so
// every conditional is well behaved.

namespace testsupport {

struct Toy {
  latticeme::SimConfig cfg;
  latticeme::SyntheticDataset ds;
  latticeme::HierData data;
  latticeme::HierState truth_state;
};

inline latticeme::SimConfig toy_sim_config() {
  latticeme::SimConfig cfg;
  cfg.n_b_per_side = 2;
  cfg.spacing = 24.0;
  cfg.sigma_b = 0.2;
  cfg.beta0 = 80.0;
  cfg.mu_beta_a = 900.0;
  cfg.mu_beta_b = 500.0;
  cfg.sd_beta_a = 40.0;
  cfg.sd_beta_b = 40.0;
  cfg.alpha0 = -0.05;
  cfg.alpha1 = -0.2;
  cfg.sigma_a = 0.3;
  cfg.r = 0.5;
  cfg.rho = 20.0;
  cfg.psi_a = 1.6;
  cfg.psi_b = 1.4;
  cfg.sigma = 30.0;
  cfg.r_pix = 0.5;
  cfg.rho_pix = 2.0;
  cfg.h_a = 2;
  cfg.h_b = 2;
  cfg.background_sd = 25.0;
  return cfg;
}

// State holding the generating values (a reasonable point to probe
// conditionals at).
inline latticeme::HierState truth_state(const latticeme::SyntheticDataset& ds) {
  const auto& g = ds.geometry;
  latticeme::HierState st;
  st.beta0 = ds.config.beta0;
  st.beta_b.resize(g.n_b());
  st.s_b.resize(g.n_b());
  for (int j = 0; j < g.n_b(); ++j) {
    st.beta_b[j] = ds.b_site(j).intensity;
    st.s_b[j] = ds.b_site(j).location;
  }
  st.beta_a.resize(g.n_a());
  st.s_a.resize(g.n_a());
  for (int j = 0; j < g.n_a(); ++j) {
    st.beta_a[j] = ds.a_site(j).intensity;
    st.s_a[j] = ds.a_site(j).location;
  }
  st.mu_beta_a = ds.config.mu_beta_a;
  st.mu_beta_b = ds.config.mu_beta_b;
  st.var_beta_a = ds.config.sd_beta_a * ds.config.sd_beta_a;
  st.var_beta_b = ds.config.sd_beta_b * ds.config.sd_beta_b;
  st.psi_a = ds.config.psi_a;
  st.psi_b = ds.config.psi_b;
  st.sigma2 = ds.config.sigma * ds.config.sigma;
  st.r_pix = ds.config.r_pix;
  st.rho_pix = ds.config.rho_pix;
  st.alpha0 = ds.config.alpha0;
  st.alpha1 = ds.config.alpha1;
  st.sigma2_a = ds.config.sigma_a * ds.config.sigma_a;
  st.sigma2_b = ds.config.sigma_b * ds.config.sigma_b;
  st.r = ds.config.r;
  st.rho = ds.config.rho;
  st.gamma = st.alpha1;
  st.eta = 1;
  return st;
}

inline Toy make_toy(std::uint64_t seed = 2024,
                    latticeme::SimConfig cfg = toy_sim_config()) {
  Toy t;
  t.cfg = cfg;
  t.ds = latticeme::simulate_dataset(cfg, latticeme::Rng(seed));
  const auto& g = t.ds.geometry;

  std::vector<latticeme::Window> a_w, b_w;
  for (int j = 0; j < g.n_b(); ++j) {
    const auto s = t.ds.b_site(j).location;
    b_w.push_back(latticeme::extract_window(t.ds.image,
                                            latticeme::round_half_away(s.x),
                                            latticeme::round_half_away(s.y),
                                            cfg.h_b, j));
  }
  for (int j = 0; j < g.n_a(); ++j) {
    const auto s = t.ds.a_site(j).location;
    a_w.push_back(latticeme::extract_window(t.ds.image,
                                            latticeme::round_half_away(s.x),
                                            latticeme::round_half_away(s.y),
                                            cfg.h_a, g.n_b() + j));
  }
  t.data = latticeme::HierData::build(g, std::move(a_w), std::move(b_w));
  t.truth_state = truth_state(t.ds);
  return t;
}

inline latticeme::HierPriors toy_priors() {
  latticeme::HierPriors pr;
  pr.mu_beta_prior_mean_a = 900.0;
  pr.mu_beta_prior_mean_b = 500.0;
  pr.sigma2_beta_prior_mean_a = 1600.0;
  pr.sigma2_beta_prior_mean_b = 1600.0;
  // The toy has one A-site; a proper-variance prior keeps the sigma2_a
  // conditional's moments finite so quadrature comparisons converge.
  pr.sigma2_a_shape = 3.0;
  pr.sigma2_a_rate = 0.2;
  return pr;
}

}  // namespace testsupport

#endif
