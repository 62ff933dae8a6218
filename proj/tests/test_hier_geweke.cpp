#include <doctest.h>

#include <cmath>
#include <functional>
#include <map>
#include <vector>

#include "latticeme/covariance.hpp"
#include "latticeme/hier.hpp"
#include "latticeme/kernel.hpp"
#include "support/ks.hpp"
#include "support/toy.hpp"

// Joint consistency of the whole sampler: forward simulation from the prior
// and successive-conditional simulation (redraw the window data given the
// state, then advance the chain given the data) must leave the parameter
// distribution invariant. Compared parameter by parameter with a two-sample
// KS test. Proper, moderately informative priors keep the forward draws in
// a numerically sane region; the location draws honor the same fixed-window
// truncation the chain enforces.

using namespace latticeme;

namespace {

// Weakly informative data relative to the priors keeps the per-cycle
// posterior widths within a small factor of the prior widths, so the
// successive-conditional chain traverses the prior in a few cycles. The
// random-walk steps are likewise set to prior scale.
HierPriors geweke_priors() {
  HierPriors pr;
  pr.beta0_var = 25.0;
  pr.mu_beta_prior_mean_a = 200.0;
  pr.mu_beta_prior_mean_b = 200.0;
  pr.mu_beta_var = 400.0;
  pr.sigma2_beta_prior_mean_a = 900.0;
  pr.sigma2_beta_prior_mean_b = 900.0;
  pr.sigma2_beta_prior_varscale = 400.0;
  pr.psi_log_var = 0.01;
  pr.sigma2_shape = 8.0;
  pr.sigma2_rate = 8.0 * 2000.0;
  pr.rho_pix_log_var = 0.09;
  pr.alpha_var = 0.04;
  pr.sigma2_a_shape = 5.0;
  pr.sigma2_a_rate = 0.6;
  pr.sigma2_b_shape = 5.0;
  pr.sigma2_b_rate = 0.6;
  pr.rho_log_var = 0.25;
  pr.step_loc_a = 0.4;
  pr.step_loc_b = 0.4;
  pr.step_log_psi = 0.08;
  pr.step_logit_r_pix = 1.2;
  pr.step_log_rho_pix = 0.4;
  pr.step_logit_r = 2.0;
  pr.step_log_rho = 0.6;
  return pr;
}

// One forward draw of the full state. The chain's fixed-window rule makes
// its stationary law the model density times the indicator that every site
// sits inside its window, so the forward draw must reject the whole state
// whenever any location lands outside (per-coordinate retries would fail to
// reweight alpha0, sigma2_b and friends by the truncation probability).
HierState forward_state(const HierData& data, const HierPriors& pr, Rng& rng) {
  const int n_a = data.n_a();
  const int n_b = data.n_b();
  auto inside = [](Vec2 s, const Window& w) {
    return std::abs(s.x - w.cx) <= w.half_width && std::abs(s.y - w.cy) <= w.half_width;
  };
  for (;;) {
    HierState st;
    st.beta0 = std::sqrt(pr.beta0_var) * rng.normal();
    st.mu_beta_a = pr.mu_beta_prior_mean_a + std::sqrt(pr.mu_beta_var) * rng.normal();
    st.mu_beta_b = pr.mu_beta_prior_mean_b + std::sqrt(pr.mu_beta_var) * rng.normal();
    const auto [aa, ba] = pr.beta_ig_shape_rate(SiteType::A);
    const auto [ab, bb] = pr.beta_ig_shape_rate(SiteType::B);
    st.var_beta_a = rng.inv_gamma(aa, ba);
    st.var_beta_b = rng.inv_gamma(ab, bb);
    st.beta_a.resize(n_a);
    st.beta_b.resize(n_b);
    for (double& b : st.beta_a)
      b = st.mu_beta_a + std::sqrt(st.var_beta_a) * rng.normal();
    for (double& b : st.beta_b)
      b = st.mu_beta_b + std::sqrt(st.var_beta_b) * rng.normal();
    st.psi_a = std::exp(std::sqrt(pr.psi_log_var) * rng.normal());
    st.psi_b = std::exp(std::sqrt(pr.psi_log_var) * rng.normal());
    st.sigma2 = rng.inv_gamma(pr.sigma2_shape, pr.sigma2_rate);
    st.r_pix = rng.uniform();
    st.rho_pix = std::exp(std::sqrt(pr.rho_pix_log_var) * rng.normal());
    st.alpha0 = std::sqrt(pr.alpha_var) * rng.normal();
    st.alpha1 = std::sqrt(pr.alpha_var) * rng.normal();
    st.sigma2_a = rng.inv_gamma(pr.sigma2_a_shape, pr.sigma2_a_rate);
    st.sigma2_b = rng.inv_gamma(pr.sigma2_b_shape, pr.sigma2_b_rate);
    st.r = rng.uniform();
    st.rho = std::exp(std::sqrt(pr.rho_log_var) * rng.normal());
    st.gamma = st.alpha1;
    st.eta = 1;

    bool ok = true;
    st.s_b.resize(n_b);
    for (int j = 0; j < n_b; ++j) {
      st.s_b[j] = {data.geometry.b_means[j].x + std::sqrt(st.sigma2_b) * rng.normal(),
                   data.geometry.b_means[j].y + std::sqrt(st.sigma2_b) * rng.normal()};
      if (!inside(st.s_b[j], data.b_windows[j])) ok = false;
    }
    st.s_a.resize(n_a);
    const Matrix v = exp_cov_from_dist(data.dist_a, {st.sigma2_a, st.r, st.rho});
    const CovFactor fv = factorize(v);
    std::vector<double> zero(n_a, 0.0);
    const auto ex = sample_mvn(zero, fv, rng);
    const auto ey = sample_mvn(zero, fv, rng);
    for (int j = 0; j < n_a; ++j) {
      Vec2 locs[4];
      double betas[4];
      for (int k = 0; k < 4; ++k) {
        locs[k] = st.s_b[data.geometry.a_neighbors[j][k]];
        betas[k] = st.beta_b[data.geometry.a_neighbors[j][k]];
      }
      const Vec2 u = unweighted_center(locs);
      const Vec2 w = weighted_center(locs, betas);
      st.s_a[j] = {u.x + st.alpha0 + st.alpha1 * (w.x - u.x) + ex[j],
                   u.y + st.alpha0 + st.alpha1 * (w.y - u.y) + ey[j]};
      if (!inside(st.s_a[j], data.a_windows[j])) ok = false;
    }
    if (ok) return st;
  }
}

// Redraw every window's intensities from the data layer at the given state.
void redraw_windows(HierData& data, const HierState& st, Rng& rng) {
  const CovFactor fa =
      factorize(exp_cov_from_dist(data.dist_win_a, {st.sigma2, st.r_pix, st.rho_pix}));
  const CovFactor fb =
      factorize(exp_cov_from_dist(data.dist_win_b, {st.sigma2, st.r_pix, st.rho_pix}));
  for (int j = 0; j < data.n_a(); ++j) {
    Window& w = data.a_windows[j];
    std::vector<double> mu = window_mean(w, st.s_a[j], st.beta0, st.beta_a[j], st.psi_a);
    w.y = sample_mvn(mu, fa, rng);
  }
  for (int j = 0; j < data.n_b(); ++j) {
    Window& w = data.b_windows[j];
    std::vector<double> mu = window_mean(w, st.s_b[j], st.beta0, st.beta_b[j], st.psi_b);
    w.y = sample_mvn(mu, fb, rng);
  }
}

}  // namespace

TEST_CASE("forward and successive-conditional simulation agree" *
          doctest::timeout(1200)) {
  auto cfg = testsupport::toy_sim_config();
  cfg.h_a = 1;
  cfg.h_b = 1;  // 9-pixel windows: the data stays weakly informative
  auto toy = testsupport::make_toy(8, cfg);
  const HierPriors pr = geweke_priors();

  std::map<std::string, std::function<double(const HierState&)>> track = {
      {"beta0", [](const HierState& s) { return s.beta0; }},
      {"mu_beta_b", [](const HierState& s) { return s.mu_beta_b; }},
      {"var_beta_a", [](const HierState& s) { return s.var_beta_a; }},
      {"psi_a", [](const HierState& s) { return s.psi_a; }},
      {"sigma2", [](const HierState& s) { return s.sigma2; }},
      {"r_pix", [](const HierState& s) { return s.r_pix; }},
      {"rho_pix", [](const HierState& s) { return s.rho_pix; }},
      {"alpha0", [](const HierState& s) { return s.alpha0; }},
      {"alpha1", [](const HierState& s) { return s.alpha1; }},
      {"sigma2_a", [](const HierState& s) { return s.sigma2_a; }},
      {"sigma2_b", [](const HierState& s) { return s.sigma2_b; }},
      {"r", [](const HierState& s) { return s.r; }},
      {"beta_b0", [](const HierState& s) { return s.beta_b[0]; }},
      {"s_b0_x", [](const HierState& s) { return s.s_b[0].x; }},
      {"s_a0_y", [](const HierState& s) { return s.s_a[0].y; }},
  };

  // Forward sample.
  const int n_forward = 4000;
  Rng fw(101);
  std::map<std::string, std::vector<double>> forward;
  for (int i = 0; i < n_forward; ++i) {
    const HierState st = forward_state(toy.data, pr, fw);
    for (const auto& [name, fn] : track) forward[name].push_back(fn(st));
  }

  // Successive-conditional chain: y | state, then sweeps of state | y.
  const int n_cycles = 16000;
  const int keep_every = 10;
  Rng gw(357);
  HierData data = toy.data;
  HierState st = forward_state(toy.data, pr, gw);
  std::map<std::string, std::vector<double>> chain;
  for (int cycle = 0; cycle < n_cycles; ++cycle) {
    Rng ry = gw.child("y").child(static_cast<std::uint64_t>(cycle));
    redraw_windows(data, st, ry);
    HierSampler sampler(data, pr, st,
                        gw.child("sweep").child(static_cast<std::uint64_t>(cycle)).key());
    sampler.set_adapting(false);
    sampler.sweep();
    sampler.sweep();
    sampler.sweep();
    st = sampler.state();
    if (cycle % keep_every == 0)
      for (const auto& [name, fn] : track) chain[name].push_back(fn(st));
  }

  for (const auto& [name, fn] : track) {
    (void)fn;
    const double d = testsupport::ks_two_sample(forward[name], chain[name]);
    const double p =
        testsupport::ks_two_sample_pvalue(d, forward[name].size(), chain[name].size());
    INFO("parameter ", name, " ks ", d, " p ", p);
    CHECK(p > 0.01);
  }
}
