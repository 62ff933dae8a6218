#include "latticeme/hier.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <functional>
#include <sstream>
#include <utility>

#include "latticeme/errors.hpp"
#include "latticeme/kernel.hpp"
#include "latticeme/simd.hpp"
#include "latticeme/simulate.hpp"

namespace latticeme {
namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }
// log density (up to a constant) of the logistic transform of a Uniform(0,1)
// variable: theta - 2 log(1+e^theta).
inline double loglogistic(double t) {
  return t - 2.0 * (t > 30.0 ? t : std::log1p(std::exp(t)));
}

Matrix offsets_dist(const Window& w) {
  std::vector<Vec2> coords(w.size());
  for (std::size_t k = 0; k < w.size(); ++k) coords[k] = {w.px[k], w.py[k]};
  return distance_matrix(coords);
}

}  // namespace

long HierData::total_pixels() const {
  long t = 0;
  for (const auto& w : a_windows) t += static_cast<long>(w.size());
  for (const auto& w : b_windows) t += static_cast<long>(w.size());
  return t;
}

HierData HierData::build(LatticeGeometry geometry, std::vector<Window> a_windows,
                         std::vector<Window> b_windows) {
  if (static_cast<int>(a_windows.size()) != geometry.n_a() ||
      static_cast<int>(b_windows.size()) != geometry.n_b())
    throw DomainError("HierData: window counts do not match the geometry");
  std::vector<Window> all;
  all.reserve(a_windows.size() + b_windows.size());
  for (const auto& w : a_windows) all.push_back(w);
  for (const auto& w : b_windows) all.push_back(w);
  if (!check_disjoint(all)) throw DomainError("HierData: windows overlap");

  HierData d;
  d.dist_win_a = offsets_dist(a_windows.front());
  d.dist_win_b = offsets_dist(b_windows.front());
  d.geometry = std::move(geometry);
  d.a_windows = std::move(a_windows);
  d.b_windows = std::move(b_windows);
  d.dist_a = distance_matrix(d.geometry.a_means);
  return d;
}

HierSampler::HierSampler(const HierData& data, const HierPriors& priors,
                         HierState init, std::uint64_t seed)
    : data_(data), pr_(priors), st_(std::move(init)) {
  if (static_cast<int>(st_.beta_a.size()) != data_.n_a() ||
      static_cast<int>(st_.beta_b.size()) != data_.n_b() ||
      static_cast<int>(st_.s_a.size()) != data_.n_a() ||
      static_cast<int>(st_.s_b.size()) != data_.n_b())
    throw DomainError("HierSampler: state dimensions do not match the data");

  const Rng root(seed);
  for (const char* name :
       {"beta0", "sigma2", "beta_a", "beta_b", "loc_a", "loc_b", "process_reg",
        "process_corr", "hyper", "psi_pixcorr", "ssvs"})
    rngs_.emplace(name, root.child(name));

  tune_loc_a_.resize(data_.n_a());
  for (auto& t : tune_loc_a_) t.log_step = std::log(pr_.step_loc_a);
  tune_loc_b_.resize(data_.n_b());
  for (auto& t : tune_loc_b_) t.log_step = std::log(pr_.step_loc_b);
  tune_psi_a_.log_step = tune_psi_b_.log_step = std::log(pr_.step_log_psi);
  tune_r_pix_.log_step = std::log(pr_.step_logit_r_pix);
  tune_rho_pix_.log_step = std::log(pr_.step_log_rho_pix);
  tune_r_.log_step = std::log(pr_.step_logit_r);
  tune_rho_.log_step = std::log(pr_.step_log_rho);

  wc_a_.resize(data_.n_a());
  wc_b_.resize(data_.n_b());
  rebuild_pixel_caches();
  rebuild_process_vectors();
  rebuild_process_cache();
}

Rng& HierSampler::rng(const std::string& block) { return rngs_.at(block); }

const Window& HierSampler::win(SiteType t, int j) const {
  return t == SiteType::A ? data_.a_windows[j] : data_.b_windows[j];
}
HierSampler::WinCache& HierSampler::cache(SiteType t, int j) {
  return t == SiteType::A ? wc_a_[j] : wc_b_[j];
}
HierSampler::TypeCache& HierSampler::type_cache(SiteType t) {
  return t == SiteType::A ? tc_a_ : tc_b_;
}
const HierSampler::TypeCache& HierSampler::type_cache(SiteType t) const {
  return t == SiteType::A ? tc_a_ : tc_b_;
}

void HierSampler::rebuild_pixel_caches() {
  const ExpCovParams p{st_.sigma2, st_.r_pix, st_.rho_pix};
  tc_a_.fac = factorize(exp_cov_from_dist(data_.dist_win_a, p));
  tc_b_.fac = factorize(exp_cov_from_dist(data_.dist_win_b, p));
  for (SiteType t : {SiteType::A, SiteType::B}) {
    TypeCache& tc = type_cache(t);
    const std::size_t m = t == SiteType::A ? data_.a_windows.front().size()
                                           : data_.b_windows.front().size();
    tc.so.assign(m, 1.0);
    tc.fac.solve_lower(tc.so.data());
    tc.oo = simd::kernels().dot(tc.so.data(), tc.so.data(), m);
  }
  rebuild_window_vectors(SiteType::A);
  rebuild_window_vectors(SiteType::B);
}

void HierSampler::rebuild_window_vectors(SiteType t) {
  const int n = t == SiteType::A ? data_.n_a() : data_.n_b();
  const TypeCache& tc = type_cache(t);
  const double psi = t == SiteType::A ? st_.psi_a : st_.psi_b;
  for (int j = 0; j < n; ++j) {
    const Window& w = win(t, j);
    WinCache& c = cache(t, j);
    const Vec2 s = t == SiteType::A ? st_.s_a[j] : st_.s_b[j];
    c.x.resize(w.size());
    kernel_weights(w, s, psi, c.x.data());
    c.sx = c.x;
    tc.fac.solve_lower(c.sx.data());
    c.sy = w.y;
    tc.fac.solve_lower(c.sy.data());
  }
}

void HierSampler::rebuild_process_vectors() {
  std::vector<Vec2> b_loc = st_.s_b;
  const ProcessVectors pv = process_vectors(data_.geometry, b_loc, st_.beta_b, st_.s_a);
  delta_x_ = pv.delta_x;
  delta_y_ = pv.delta_y;
  psi_x_ = pv.psi_x;
  psi_y_ = pv.psi_y;
}

void HierSampler::rebuild_process_cache() {
  pfac_ = factorize(exp_cov_from_dist(data_.dist_a, {st_.sigma2_a, st_.r, st_.rho}));
  p_so_.assign(data_.n_a(), 1.0);
  pfac_.solve_lower(p_so_.data());
  p_oo_ = simd::kernels().dot(p_so_.data(), p_so_.data(), p_so_.size());
  q_proc_ = recompute_q_proc();
}

double HierSampler::recompute_q_proc() {
  const int n = data_.n_a();
  std::vector<double> mx(n), my(n);
  for (int j = 0; j < n; ++j) {
    mx[j] = delta_x_[j] - st_.alpha0 - st_.alpha1 * psi_x_[j];
    my[j] = delta_y_[j] - st_.alpha0 - st_.alpha1 * psi_y_[j];
  }
  return process_quad_with(mx, my);
}

double HierSampler::process_quad_with(std::span<const double> mx,
                                      std::span<const double> my) const {
  const std::size_t n = mx.size();
  std::vector<double> w(n);
  std::memcpy(w.data(), mx.data(), n * sizeof(double));
  pfac_.solve_lower(w.data());
  double q = simd::kernels().dot(w.data(), w.data(), n);
  std::memcpy(w.data(), my.data(), n * sizeof(double));
  pfac_.solve_lower(w.data());
  q += simd::kernels().dot(w.data(), w.data(), n);
  return q;
}

double HierSampler::window_ssq(SiteType t, int j) const {
  const WinCache& c = t == SiteType::A ? wc_a_[j] : wc_b_[j];
  const TypeCache& tc = type_cache(t);
  const double beta = t == SiteType::A ? st_.beta_a[j] : st_.beta_b[j];
  return simd::kernels().resid_sq_norm(c.sy.data(), st_.beta0, tc.so.data(), beta,
                                       c.sx.data(), c.sy.size());
}

double HierSampler::window_ssq_with(SiteType t, int j,
                                    const std::vector<double>& sx) const {
  const WinCache& c = t == SiteType::A ? wc_a_[j] : wc_b_[j];
  const TypeCache& tc = type_cache(t);
  const double beta = t == SiteType::A ? st_.beta_a[j] : st_.beta_b[j];
  return simd::kernels().resid_sq_norm(c.sy.data(), st_.beta0, tc.so.data(), beta,
                                       sx.data(), c.sy.size());
}

double HierSampler::block_loglik() const {
  double ll = 0.0;
  for (int j = 0; j < data_.n_a(); ++j)
    ll += -0.5 * (static_cast<double>(wc_a_[j].sy.size()) * kLog2Pi +
                  tc_a_.fac.log_det() + window_ssq(SiteType::A, j));
  for (int j = 0; j < data_.n_b(); ++j)
    ll += -0.5 * (static_cast<double>(wc_b_[j].sy.size()) * kLog2Pi +
                  tc_b_.fac.log_det() + window_ssq(SiteType::B, j));
  return ll;
}

double HierSampler::process_loglik() const {
  return -0.5 * (2.0 * (static_cast<double>(data_.n_a()) * kLog2Pi + pfac_.log_det()) +
                 q_proc_);
}

void HierSampler::check_finite() const {
  if (std::isfinite(q_proc_) && std::isfinite(block_loglik())) return;
  std::ostringstream dump;
  dump << "non-finite log likelihood; state dump: beta0=" << st_.beta0
       << " sigma2=" << st_.sigma2 << " r_pix=" << st_.r_pix
       << " rho_pix=" << st_.rho_pix << " psi_a=" << st_.psi_a
       << " psi_b=" << st_.psi_b << " alpha0=" << st_.alpha0
       << " alpha1=" << st_.alpha1 << " sigma2_a=" << st_.sigma2_a
       << " sigma2_b=" << st_.sigma2_b << " r=" << st_.r << " rho=" << st_.rho;
  throw DomainError(dump.str());
}

// ---------------------------------------------------------------------------
// Conjugate conditionals (data layer and process layer).

NormalParams HierSampler::beta0_conditional() const {
  const auto& k = simd::kernels();
  double v = 1.0 / pr_.beta0_var;
  v += data_.n_a() * tc_a_.oo + data_.n_b() * tc_b_.oo;
  double m = 0.0;
  for (int j = 0; j < data_.n_a(); ++j)
    m += k.dot(wc_a_[j].sy.data(), tc_a_.so.data(), tc_a_.so.size()) -
         st_.beta_a[j] * k.dot(wc_a_[j].sx.data(), tc_a_.so.data(), tc_a_.so.size());
  for (int j = 0; j < data_.n_b(); ++j)
    m += k.dot(wc_b_[j].sy.data(), tc_b_.so.data(), tc_b_.so.size()) -
         st_.beta_b[j] * k.dot(wc_b_[j].sx.data(), tc_b_.so.data(), tc_b_.so.size());
  return {m / v, 1.0 / v};
}

NormalParams HierSampler::beta_a_conditional(int j) const {
  const auto& k = simd::kernels();
  const WinCache& c = wc_a_[j];
  const std::size_t m = c.sy.size();
  const double v = k.dot(c.sx.data(), c.sx.data(), m) + 1.0 / st_.var_beta_a;
  const double num = k.dot(c.sx.data(), c.sy.data(), m) -
                     st_.beta0 * k.dot(c.sx.data(), tc_a_.so.data(), m) +
                     st_.mu_beta_a / st_.var_beta_a;
  return {num / v, 1.0 / v};
}

NormalParams HierSampler::beta_b_proposal(int j) const {
  const auto& k = simd::kernels();
  const WinCache& c = wc_b_[j];
  const std::size_t m = c.sy.size();
  const double v = k.dot(c.sx.data(), c.sx.data(), m) + 1.0 / st_.var_beta_b;
  const double num = k.dot(c.sx.data(), c.sy.data(), m) -
                     st_.beta0 * k.dot(c.sx.data(), tc_b_.so.data(), m) +
                     st_.mu_beta_b / st_.var_beta_b;
  return {num / v, 1.0 / v};
}

InvGammaParams HierSampler::sigma2_conditional() const {
  double ssq = 0.0;
  for (int j = 0; j < data_.n_a(); ++j) ssq += window_ssq(SiteType::A, j);
  for (int j = 0; j < data_.n_b(); ++j) ssq += window_ssq(SiteType::B, j);
  // ssq is against the full covariance; the correlation-only quadratic form
  // is sigma2 times it.
  return {pr_.sigma2_shape + 0.5 * static_cast<double>(data_.total_pixels()),
          pr_.sigma2_rate + 0.5 * st_.sigma2 * ssq};
}

NormalParams HierSampler::alpha0_conditional() const {
  const auto& k = simd::kernels();
  const int n = data_.n_a();
  const double v = 2.0 * p_oo_ + 1.0 / pr_.alpha_var;
  std::vector<double> w(n);
  double m = 0.0;
  for (const auto* pair : {&delta_x_, &delta_y_}) {
    const auto& d = *pair;
    const auto& ps = pair == &delta_x_ ? psi_x_ : psi_y_;
    for (int j = 0; j < n; ++j) w[j] = d[j] - st_.alpha1 * ps[j];
    pfac_.solve_lower(w.data());
    m += k.dot(w.data(), p_so_.data(), n);
  }
  return {m / v, 1.0 / v};
}

NormalParams HierSampler::alpha1_conditional() const {
  const auto& k = simd::kernels();
  const int n = data_.n_a();
  std::vector<double> wp(n), wd(n);
  double v = 1.0 / pr_.alpha_var;
  double m = 0.0;
  for (int coord = 0; coord < 2; ++coord) {
    const auto& ps = coord == 0 ? psi_x_ : psi_y_;
    const auto& d = coord == 0 ? delta_x_ : delta_y_;
    std::memcpy(wp.data(), ps.data(), n * sizeof(double));
    pfac_.solve_lower(wp.data());
    for (int j = 0; j < n; ++j) wd[j] = d[j] - st_.alpha0;
    pfac_.solve_lower(wd.data());
    v += k.dot(wp.data(), wp.data(), n);
    m += k.dot(wp.data(), wd.data(), n);
  }
  return {m / v, 1.0 / v};
}

InvGammaParams HierSampler::sigma2_a_conditional() const {
  // q_proc_ is against V = sigma2_a * correlation; V*^{-1} = sigma2_a V^{-1}.
  return {pr_.sigma2_a_shape + static_cast<double>(data_.n_a()),
          pr_.sigma2_a_rate + 0.5 * st_.sigma2_a * q_proc_};
}

NormalParams HierSampler::mu_beta_conditional(SiteType t) const {
  const auto& betas = t == SiteType::A ? st_.beta_a : st_.beta_b;
  const double var_beta = t == SiteType::A ? st_.var_beta_a : st_.var_beta_b;
  const double prior_mean =
      t == SiteType::A ? pr_.mu_beta_prior_mean_a : pr_.mu_beta_prior_mean_b;
  const double prec = 1.0 / pr_.mu_beta_var + static_cast<double>(betas.size()) / var_beta;
  double s = 0.0;
  for (double b : betas) s += b;
  return {(prior_mean / pr_.mu_beta_var + s / var_beta) / prec, 1.0 / prec};
}

InvGammaParams HierSampler::sigma2_beta_conditional(SiteType t) const {
  const auto& betas = t == SiteType::A ? st_.beta_a : st_.beta_b;
  const double mu = t == SiteType::A ? st_.mu_beta_a : st_.mu_beta_b;
  const auto [a, b] = pr_.beta_ig_shape_rate(t);
  double ss = 0.0;
  for (double x : betas) ss += (x - mu) * (x - mu);
  return {a + 0.5 * static_cast<double>(betas.size()), b + 0.5 * ss};
}

InvGammaParams HierSampler::sigma2_b_conditional() const {
  double ss = 0.0;
  for (int j = 0; j < data_.n_b(); ++j) {
    const Vec2 d = st_.s_b[j] - data_.geometry.b_means[j];
    ss += d.x * d.x + d.y * d.y;
  }
  return {pr_.sigma2_b_shape + static_cast<double>(data_.n_b()),
          pr_.sigma2_b_rate + 0.5 * ss};
}

NormalParams HierSampler::ssvs_gamma_conditional() const {
  const auto& k = simd::kernels();
  const int n = data_.n_a();
  std::vector<double> wp(n), wd(n);
  const double slab_var = pr_.ssvs_slab_sd * pr_.ssvs_slab_sd;
  double v = 1.0 / slab_var;
  double m = 0.0;
  for (int coord = 0; coord < 2; ++coord) {
    const auto& ps = coord == 0 ? psi_x_ : psi_y_;
    const auto& d = coord == 0 ? delta_x_ : delta_y_;
    std::memcpy(wp.data(), ps.data(), n * sizeof(double));
    pfac_.solve_lower(wp.data());
    for (int j = 0; j < n; ++j) wd[j] = d[j] - st_.alpha0;
    pfac_.solve_lower(wd.data());
    v += k.dot(wp.data(), wp.data(), n);
    m += k.dot(wp.data(), wd.data(), n);
  }
  return {m / v, 1.0 / v};
}

double HierSampler::ssvs_inclusion_probability() const {
  const int n = data_.n_a();
  std::vector<double> mx(n), my(n);
  for (int j = 0; j < n; ++j) {
    mx[j] = delta_x_[j] - st_.alpha0 - st_.gamma * psi_x_[j];
    my[j] = delta_y_[j] - st_.alpha0 - st_.gamma * psi_y_[j];
  }
  const double q1 = process_quad_with(mx, my);
  for (int j = 0; j < n; ++j) {
    mx[j] = delta_x_[j] - st_.alpha0;
    my[j] = delta_y_[j] - st_.alpha0;
  }
  const double q0 = process_quad_with(mx, my);
  const double lw1 = std::log(pr_.ssvs_prior_inclusion) - 0.5 * q1;
  const double lw0 = std::log(1.0 - pr_.ssvs_prior_inclusion) - 0.5 * q0;
  return 1.0 / (1.0 + std::exp(lw0 - lw1));
}

// ---------------------------------------------------------------------------
// Gibbs updates.

void HierSampler::update_beta0() {
  const NormalParams p = beta0_conditional();
  st_.beta0 = p.mean + std::sqrt(p.var) * rng("beta0").normal();
}

void HierSampler::update_sigma2() {
  const InvGammaParams p = sigma2_conditional();
  const double s2 = rng("sigma2").inv_gamma(p.shape, p.rate);
  const double ratio = s2 / st_.sigma2;
  const double inv_sqrt = 1.0 / std::sqrt(ratio);
  for (TypeCache* tc : {&tc_a_, &tc_b_}) {
    tc->fac.rescale(ratio);
    for (double& v : tc->so) v *= inv_sqrt;
    tc->oo /= ratio;
  }
  for (auto* wcs : {&wc_a_, &wc_b_})
    for (WinCache& c : *wcs) {
      for (double& v : c.sx) v *= inv_sqrt;
      for (double& v : c.sy) v *= inv_sqrt;
    }
  st_.sigma2 = s2;
}

void HierSampler::update_beta_a() {
  Rng& r = rng("beta_a");
  for (int j = 0; j < data_.n_a(); ++j) {
    const NormalParams p = beta_a_conditional(j);
    st_.beta_a[j] = p.mean + std::sqrt(p.var) * r.normal();
  }
}

void HierSampler::update_beta_b_one(int j, bool hastings_correction) {
  Rng& r = rng("beta_b");
  const int n_a = data_.n_a();
  std::vector<double> mx(n_a), my(n_a);

  const NormalParams q = beta_b_proposal(j);
  const double beta_new = q.mean + std::sqrt(q.var) * r.normal();
  const double beta_old = st_.beta_b[j];

  // Data layer and prior.
  const double ssq_old = window_ssq(SiteType::B, j);
  st_.beta_b[j] = beta_new;
  const double ssq_new = window_ssq(SiteType::B, j);
  st_.beta_b[j] = beta_old;
  double la = -0.5 * (ssq_new - ssq_old);
  la += -0.5 * ((beta_new - st_.mu_beta_b) * (beta_new - st_.mu_beta_b) -
                (beta_old - st_.mu_beta_b) * (beta_old - st_.mu_beta_b)) /
        st_.var_beta_b;

  // Process layer: the weighted centers of the neighboring A sites move.
  for (int k = 0; k < n_a; ++k) {
    mx[k] = delta_x_[k] - st_.alpha0 - st_.alpha1 * psi_x_[k];
    my[k] = delta_y_[k] - st_.alpha0 - st_.alpha1 * psi_y_[k];
  }
  std::vector<std::pair<int, Vec2>> new_psi;  // (A index, new psi entry)
  st_.beta_b[j] = beta_new;
  for (int k = 0; k < n_a; ++k) {
    const auto& nb = data_.geometry.a_neighbors[k];
    if (nb[0] != j && nb[1] != j && nb[2] != j && nb[3] != j) continue;
    Vec2 locs[4];
    double betas[4];
    for (int q4 = 0; q4 < 4; ++q4) {
      locs[q4] = st_.s_b[nb[q4]];
      betas[q4] = st_.beta_b[nb[q4]];
    }
    const Vec2 u = unweighted_center(locs);
    const Vec2 w = weighted_center(locs, betas);
    const Vec2 psi_new = w - u;
    new_psi.push_back({k, psi_new});
    mx[k] = delta_x_[k] - st_.alpha0 - st_.alpha1 * psi_new.x;
    my[k] = delta_y_[k] - st_.alpha0 - st_.alpha1 * psi_new.y;
  }
  st_.beta_b[j] = beta_old;
  const double q_new = process_quad_with(mx, my);
  la += -0.5 * (q_new - q_proc_);

  if (hastings_correction) {
    const double zo = beta_old - q.mean;
    const double zn = beta_new - q.mean;
    la += -0.5 * (zo * zo - zn * zn) / q.var;
  }

  const bool accept = std::log(r.uniform_pos()) < la;
  auto& acc = accept_["beta_b"];
  ++acc.second;
  if (accept) {
    ++acc.first;
    st_.beta_b[j] = beta_new;
    for (const auto& [k, pnew] : new_psi) {
      psi_x_[k] = pnew.x;
      psi_y_[k] = pnew.y;
    }
    q_proc_ = q_new;
  }
}

void HierSampler::update_beta_b(bool hastings_correction) {
  for (int j = 0; j < data_.n_b(); ++j) update_beta_b_one(j, hastings_correction);
}

// ---------------------------------------------------------------------------
// Metropolis location updates.

void HierSampler::update_location_one(SiteType t, int j) {
  const bool is_a = t == SiteType::A;
  Rng& r = rng(is_a ? "loc_a" : "loc_b");
  const char* block = is_a ? "loc_a" : "loc_b";
  Tuner& tn = is_a ? tune_loc_a_[j] : tune_loc_b_[j];
  const int n_a = data_.n_a();
  std::vector<double> mx(n_a), my(n_a);

  const double step = step_of(tn);
  const Vec2 s_old = is_a ? st_.s_a[j] : st_.s_b[j];
  const Vec2 s_new{s_old.x + step * r.normal(), s_old.y + step * r.normal()};
  const Window& w = win(t, j);
  // Moves that leave the fixed window invalidate the block partition.
  if (std::abs(s_new.x - w.cx) > w.half_width ||
      std::abs(s_new.y - w.cy) > w.half_width) {
    propose_tuned(tn, false, block);
    return;
  }
  std::vector<double> x_new(w.size()), sx_new;
  kernel_weights(w, s_new, is_a ? st_.psi_a : st_.psi_b, x_new.data());
  sx_new = x_new;
  type_cache(t).fac.solve_lower(sx_new.data());
  double la = -0.5 * (window_ssq_with(t, j, sx_new) - window_ssq(t, j));

  for (int k = 0; k < n_a; ++k) {
    mx[k] = delta_x_[k] - st_.alpha0 - st_.alpha1 * psi_x_[k];
    my[k] = delta_y_[k] - st_.alpha0 - st_.alpha1 * psi_y_[k];
  }

  struct Touched {
    int k;
    Vec2 delta, psi;
  };
  std::vector<Touched> touched;
  double dx_new = 0, dy_new = 0;
  if (is_a) {
    dx_new = delta_x_[j] + (s_new.x - s_old.x);
    dy_new = delta_y_[j] + (s_new.y - s_old.y);
    mx[j] = dx_new - st_.alpha0 - st_.alpha1 * psi_x_[j];
    my[j] = dy_new - st_.alpha0 - st_.alpha1 * psi_y_[j];
  } else {
    // Eq. 7 prior around the expected grid position.
    const Vec2 mu = data_.geometry.b_means[j];
    const Vec2 dn = s_new - mu;
    const Vec2 dq = s_old - mu;
    la += -0.5 *
          ((dn.x * dn.x + dn.y * dn.y) - (dq.x * dq.x + dq.y * dq.y)) /
          st_.sigma2_b;
    // Both u and w move for every neighboring A site.
    st_.s_b[j] = s_new;
    for (int k = 0; k < n_a; ++k) {
      const auto& nb = data_.geometry.a_neighbors[k];
      if (nb[0] != j && nb[1] != j && nb[2] != j && nb[3] != j) continue;
      Vec2 locs[4];
      double betas[4];
      for (int q4 = 0; q4 < 4; ++q4) {
        locs[q4] = st_.s_b[nb[q4]];
        betas[q4] = st_.beta_b[nb[q4]];
      }
      const Vec2 u = unweighted_center(locs);
      const Vec2 wgt = weighted_center(locs, betas);
      const Vec2 d{st_.s_a[k].x - u.x, st_.s_a[k].y - u.y};
      const Vec2 ps{wgt.x - u.x, wgt.y - u.y};
      touched.push_back({k, d, ps});
      mx[k] = d.x - st_.alpha0 - st_.alpha1 * ps.x;
      my[k] = d.y - st_.alpha0 - st_.alpha1 * ps.y;
    }
    st_.s_b[j] = s_old;
  }
  const double q_new = process_quad_with(mx, my);
  la += -0.5 * (q_new - q_proc_);

  const bool accept = std::log(r.uniform_pos()) < la;
  propose_tuned(tn, accept, block);
  if (!accept) return;
  if (is_a) {
    st_.s_a[j] = s_new;
    delta_x_[j] = dx_new;
    delta_y_[j] = dy_new;
    wc_a_[j].x = std::move(x_new);
    wc_a_[j].sx = std::move(sx_new);
  } else {
    st_.s_b[j] = s_new;
    for (const auto& tch : touched) {
      delta_x_[tch.k] = tch.delta.x;
      delta_y_[tch.k] = tch.delta.y;
      psi_x_[tch.k] = tch.psi.x;
      psi_y_[tch.k] = tch.psi.y;
    }
    wc_b_[j].x = std::move(x_new);
    wc_b_[j].sx = std::move(sx_new);
  }
  q_proc_ = q_new;
}

void HierSampler::update_locations_a() {
  for (int j = 0; j < data_.n_a(); ++j) update_location_one(SiteType::A, j);
}

void HierSampler::update_locations_b() {
  for (int j = 0; j < data_.n_b(); ++j) update_location_one(SiteType::B, j);
}

// ---------------------------------------------------------------------------
// Process layer.

void HierSampler::update_process_regression() {
  Rng& r = rng("process_reg");
  {
    const NormalParams p = alpha0_conditional();
    st_.alpha0 = p.mean + std::sqrt(p.var) * r.normal();
  }
  if (!pr_.ssvs) {
    const NormalParams p = alpha1_conditional();
    st_.alpha1 = p.mean + std::sqrt(p.var) * r.normal();
  }
  q_proc_ = recompute_q_proc();
  {
    const InvGammaParams p = sigma2_a_conditional();
    const double s2 = r.inv_gamma(p.shape, p.rate);
    const double ratio = s2 / st_.sigma2_a;
    pfac_.rescale(ratio);
    const double inv_sqrt = 1.0 / std::sqrt(ratio);
    for (double& v : p_so_) v *= inv_sqrt;
    p_oo_ /= ratio;
    q_proc_ /= ratio;
    st_.sigma2_a = s2;
  }
}

void HierSampler::try_process_corr(double r_new, double rho_new,
                                   double log_prior_delta, Tuner& tn,
                                   const char* block) {
  Rng& r = rng("process_corr");
  CovFactor fac_new;
  try {
    fac_new = factorize(
        exp_cov_from_dist(data_.dist_a, {st_.sigma2_a, r_new, rho_new}));
  } catch (const FactorizationError&) {
    propose_tuned(tn, false, block);
    return;
  }
  const int n = data_.n_a();
  std::vector<double> mx(n), my(n), w(n);
  for (int k = 0; k < n; ++k) {
    mx[k] = delta_x_[k] - st_.alpha0 - st_.alpha1 * psi_x_[k];
    my[k] = delta_y_[k] - st_.alpha0 - st_.alpha1 * psi_y_[k];
  }
  const auto& kk = simd::kernels();
  std::memcpy(w.data(), mx.data(), n * sizeof(double));
  fac_new.solve_lower(w.data());
  double q_new = kk.dot(w.data(), w.data(), n);
  std::memcpy(w.data(), my.data(), n * sizeof(double));
  fac_new.solve_lower(w.data());
  q_new += kk.dot(w.data(), w.data(), n);

  const double la = -0.5 * (2.0 * (fac_new.log_det() - pfac_.log_det()) +
                            (q_new - q_proc_)) +
                    log_prior_delta;
  const bool accept = std::log(r.uniform_pos()) < la;
  propose_tuned(tn, accept, block);
  if (accept) {
    pfac_ = std::move(fac_new);
    st_.r = r_new;
    st_.rho = rho_new;
    p_so_.assign(n, 1.0);
    pfac_.solve_lower(p_so_.data());
    p_oo_ = kk.dot(p_so_.data(), p_so_.data(), n);
    q_proc_ = q_new;
  }
}

void HierSampler::update_r() {
  const double t_old = logit(st_.r);
  const double t_new = t_old + step_of(tune_r_) * rng("process_corr").normal();
  try_process_corr(expit(t_new), st_.rho,
                   loglogistic(t_new) - loglogistic(t_old), tune_r_, "r");
}

void HierSampler::update_rho() {
  const double t_old = std::log(st_.rho);
  const double t_new = t_old + step_of(tune_rho_) * rng("process_corr").normal();
  try_process_corr(st_.r, std::exp(t_new),
                   -0.5 * (t_new * t_new - t_old * t_old) / pr_.rho_log_var,
                   tune_rho_, "rho");
}

void HierSampler::update_process_corr() {
  update_r();
  update_rho();
}

void HierSampler::update_hyper() {
  Rng& r = rng("hyper");
  for (SiteType t : {SiteType::A, SiteType::B}) {
    const NormalParams mp = mu_beta_conditional(t);
    const double mu = mp.mean + std::sqrt(mp.var) * r.normal();
    (t == SiteType::A ? st_.mu_beta_a : st_.mu_beta_b) = mu;
    const InvGammaParams vp = sigma2_beta_conditional(t);
    (t == SiteType::A ? st_.var_beta_a : st_.var_beta_b) =
        r.inv_gamma(vp.shape, vp.rate);
  }
  const InvGammaParams bp = sigma2_b_conditional();
  st_.sigma2_b = r.inv_gamma(bp.shape, bp.rate);
}

// ---------------------------------------------------------------------------
// Bandwidths and pixel correlation.

void HierSampler::update_psi_one(SiteType t) {
  // Bandwidth: log random walk; the prior lives on the log scale.
  Rng& r = rng("psi_pixcorr");
  Tuner& tn = t == SiteType::A ? tune_psi_a_ : tune_psi_b_;
  const char* block = t == SiteType::A ? "psi_a" : "psi_b";
  double& psi = t == SiteType::A ? st_.psi_a : st_.psi_b;
  const double t_old = std::log(psi);
  const double t_new = t_old + step_of(tn) * r.normal();
  const double psi_new = std::exp(t_new);
  const int n = t == SiteType::A ? data_.n_a() : data_.n_b();
  const TypeCache& tc = type_cache(t);

  std::vector<std::vector<double>> xs(n), sxs(n);
  double dssq = 0.0;
  for (int j = 0; j < n; ++j) {
    const Window& w = win(t, j);
    xs[j].resize(w.size());
    const Vec2 s = t == SiteType::A ? st_.s_a[j] : st_.s_b[j];
    kernel_weights(w, s, psi_new, xs[j].data());
    sxs[j] = xs[j];
    tc.fac.solve_lower(sxs[j].data());
    dssq += window_ssq_with(t, j, sxs[j]) - window_ssq(t, j);
  }
  const double la =
      -0.5 * dssq - 0.5 * (t_new * t_new - t_old * t_old) / pr_.psi_log_var;
  const bool accept = std::log(r.uniform_pos()) < la;
  propose_tuned(tn, accept, block);
  if (accept) {
    psi = psi_new;
    for (int j = 0; j < n; ++j) {
      cache(t, j).x = std::move(xs[j]);
      cache(t, j).sx = std::move(sxs[j]);
    }
  }
}

void HierSampler::try_pixel_corr(double r_new, double rho_new,
                                 double log_prior_delta, Tuner& tn,
                                 const char* block) {
  Rng& r = rng("psi_pixcorr");
  CovFactor fa, fb;
  try {
    const ExpCovParams p{st_.sigma2, r_new, rho_new};
    fa = factorize(exp_cov_from_dist(data_.dist_win_a, p));
    fb = factorize(exp_cov_from_dist(data_.dist_win_b, p));
  } catch (const FactorizationError&) {
    propose_tuned(tn, false, block);
    return;
  }
  const auto& kk = simd::kernels();
  double la = log_prior_delta;
  std::vector<double> resid;
  for (SiteType t : {SiteType::A, SiteType::B}) {
    const int n = t == SiteType::A ? data_.n_a() : data_.n_b();
    const CovFactor& fac_new = t == SiteType::A ? fa : fb;
    const TypeCache& tc = type_cache(t);
    const double dld = fac_new.log_det() - tc.fac.log_det();
    for (int j = 0; j < n; ++j) {
      const Window& w = win(t, j);
      const WinCache& c = cache(t, j);
      const double beta = t == SiteType::A ? st_.beta_a[j] : st_.beta_b[j];
      resid.resize(w.size());
      kk.residual(w.y.data(), st_.beta0, beta, c.x.data(), resid.data(), w.size());
      fac_new.solve_lower(resid.data());
      const double ssq_new = kk.dot(resid.data(), resid.data(), w.size());
      la += -0.5 * (dld + ssq_new - window_ssq(t, j));
    }
  }
  const bool accept = std::log(r.uniform_pos()) < la;
  propose_tuned(tn, accept, block);
  if (accept) {
    st_.r_pix = r_new;
    st_.rho_pix = rho_new;
    tc_a_.fac = std::move(fa);
    tc_b_.fac = std::move(fb);
    for (SiteType t : {SiteType::A, SiteType::B}) {
      TypeCache& tc = type_cache(t);
      const std::size_t m = win(t, 0).size();
      tc.so.assign(m, 1.0);
      tc.fac.solve_lower(tc.so.data());
      tc.oo = kk.dot(tc.so.data(), tc.so.data(), m);
      const int n = t == SiteType::A ? data_.n_a() : data_.n_b();
      for (int j = 0; j < n; ++j) {
        WinCache& c = cache(t, j);
        c.sx = c.x;
        tc.fac.solve_lower(c.sx.data());
        c.sy = win(t, j).y;
        tc.fac.solve_lower(c.sy.data());
      }
    }
  }
}

void HierSampler::update_r_pix() {
  const double t_old = logit(st_.r_pix);
  const double t_new = t_old + step_of(tune_r_pix_) * rng("psi_pixcorr").normal();
  try_pixel_corr(expit(t_new), st_.rho_pix,
                 loglogistic(t_new) - loglogistic(t_old), tune_r_pix_, "r_pix");
}

void HierSampler::update_rho_pix() {
  const double t_old = std::log(st_.rho_pix);
  const double t_new = t_old + step_of(tune_rho_pix_) * rng("psi_pixcorr").normal();
  try_pixel_corr(st_.r_pix, std::exp(t_new),
                 -0.5 * (t_new * t_new - t_old * t_old) / pr_.rho_pix_log_var,
                 tune_rho_pix_, "rho_pix");
}

void HierSampler::update_psi_and_pixel_corr() {
  update_psi_one(SiteType::A);
  update_psi_one(SiteType::B);
  update_r_pix();
  update_rho_pix();
}

void HierSampler::update_ssvs() {
  if (!pr_.ssvs) return;
  Rng& r = rng("ssvs");
  // eta given gamma: two-point conditional.
  const double p1 = ssvs_inclusion_probability();
  st_.eta = r.uniform() < p1 ? 1 : 0;
  st_.alpha1 = st_.gamma * st_.eta;
  // gamma given eta: conjugate slab draw when included, prior otherwise.
  if (st_.eta == 1) {
    const NormalParams p = ssvs_gamma_conditional();
    st_.gamma = p.mean + std::sqrt(p.var) * r.normal();
  } else {
    st_.gamma = pr_.ssvs_slab_sd * r.normal();
  }
  st_.alpha1 = st_.gamma * st_.eta;
  q_proc_ = recompute_q_proc();
}

void HierSampler::sweep() {
  update_beta0();
  update_sigma2();
  update_beta_a();
  update_beta_b();
  update_locations_a();
  update_locations_b();
  update_process_regression();
  update_process_corr();
  update_hyper();
  update_psi_and_pixel_corr();
  if (pr_.ssvs) update_ssvs();
  check_finite();
}

void HierSampler::set_state(const HierState& st) {
  st_ = st;
  rebuild_pixel_caches();
  rebuild_process_vectors();
  rebuild_process_cache();
}

double HierSampler::step_of(const Tuner& t) const { return std::exp(t.log_step); }

void HierSampler::propose_tuned(Tuner& t, bool accepted, const std::string& block) {
  auto& acc = accept_[block];
  ++acc.second;
  if (accepted) ++acc.first;
  if (!adapting_) return;
  t.batch_accepts += accepted ? 1 : 0;
  if (++t.batch_count < pr_.adapt.batch) return;
  ++t.batch_index;
  const double rate =
      static_cast<double>(t.batch_accepts) / static_cast<double>(t.batch_count);
  t.log_step += (rate - pr_.adapt.target) / std::sqrt(static_cast<double>(t.batch_index));
  t.log_step = std::clamp(t.log_step, -12.0, 5.0);
  t.batch_accepts = 0;
  t.batch_count = 0;
}

std::map<std::string, double> HierSampler::acceptance_rates() const {
  std::map<std::string, double> out;
  for (const auto& [block, counts] : accept_)
    out[block] = counts.second > 0
                     ? static_cast<double>(counts.first) / counts.second
                     : 0.0;
  return out;
}

// ---------------------------------------------------------------------------
// Driver.

HierFitResult run_hier_mcmc(const HierData& data, const HierPriors& priors,
                            const HierState& init, const McmcSchedule& schedule) {
  HierSampler sampler(data, priors, init, schedule.seed);
  sampler.set_adapting(priors.adapt.enabled);
  for (long i = 0; i < schedule.burn_in; ++i) sampler.sweep();
  sampler.set_adapting(false);

  std::vector<std::pair<std::string, std::function<double(const HierState&)>>> scalars = {
      {"beta0", [](const HierState& s) { return s.beta0; }},
      {"mu_beta_a", [](const HierState& s) { return s.mu_beta_a; }},
      {"mu_beta_b", [](const HierState& s) { return s.mu_beta_b; }},
      {"sigma2_beta_a", [](const HierState& s) { return s.var_beta_a; }},
      {"sigma2_beta_b", [](const HierState& s) { return s.var_beta_b; }},
      {"psi_a", [](const HierState& s) { return s.psi_a; }},
      {"psi_b", [](const HierState& s) { return s.psi_b; }},
      {"sigma2", [](const HierState& s) { return s.sigma2; }},
      {"r_pix", [](const HierState& s) { return s.r_pix; }},
      {"rho_pix", [](const HierState& s) { return s.rho_pix; }},
      {"alpha0", [](const HierState& s) { return s.alpha0; }},
      {"alpha1", [](const HierState& s) { return s.alpha1; }},
      {"sigma2_a", [](const HierState& s) { return s.sigma2_a; }},
      {"sigma2_b", [](const HierState& s) { return s.sigma2_b; }},
      {"r", [](const HierState& s) { return s.r; }},
      {"rho", [](const HierState& s) { return s.rho; }},
  };
  if (priors.ssvs) {
    scalars.push_back({"gamma", [](const HierState& s) { return s.gamma; }});
    scalars.push_back({"eta", [](const HierState& s) { return static_cast<double>(s.eta); }});
  }

  HierFitResult res;
  res.chains.n_iter = schedule.iters;
  res.chains.burn_in = schedule.burn_in;
  res.chains.thin = schedule.thin;
  res.chains.seed = schedule.seed;
  const long n_rec = schedule.iters / schedule.thin;
  for (const auto& [name, fn] : scalars) {
    (void)fn;
    Chain c;
    c.name = name;
    c.draws.reserve(n_rec);
    res.chains.chains.push_back(std::move(c));
  }

  const int n_a = data.n_a();
  const int n_b = data.n_b();
  struct Accum {
    double x = 0, y = 0, xx = 0, yy = 0, xy = 0, b = 0, bb = 0;
  };
  std::vector<Accum> acc(n_a + n_b);
  long n_kept = 0;

  for (long i = 0; i < schedule.iters; ++i) {
    sampler.sweep();
    if (i % schedule.thin != 0) continue;
    const HierState& s = sampler.state();
    for (std::size_t p = 0; p < scalars.size(); ++p)
      res.chains.chains[p].draws.push_back(scalars[p].second(s));
    ++n_kept;
    for (int j = 0; j < n_b; ++j) {
      Accum& a = acc[j];
      a.x += s.s_b[j].x;
      a.y += s.s_b[j].y;
      a.xx += s.s_b[j].x * s.s_b[j].x;
      a.yy += s.s_b[j].y * s.s_b[j].y;
      a.xy += s.s_b[j].x * s.s_b[j].y;
      a.b += s.beta_b[j];
      a.bb += s.beta_b[j] * s.beta_b[j];
    }
    for (int j = 0; j < n_a; ++j) {
      Accum& a = acc[n_b + j];
      a.x += s.s_a[j].x;
      a.y += s.s_a[j].y;
      a.xx += s.s_a[j].x * s.s_a[j].x;
      a.yy += s.s_a[j].y * s.s_a[j].y;
      a.xy += s.s_a[j].x * s.s_a[j].y;
      a.b += s.beta_a[j];
      a.bb += s.beta_a[j] * s.beta_a[j];
    }
  }

  res.chains.acceptance = sampler.acceptance_rates();
  res.sites.reserve(acc.size());
  const double n = static_cast<double>(n_kept);
  for (std::size_t j = 0; j < acc.size(); ++j) {
    const Accum& a = acc[j];
    SiteSummary ss;
    ss.id = static_cast<int>(j);
    ss.type = j < static_cast<std::size_t>(n_b) ? SiteType::B : SiteType::A;
    ss.mean_x = a.x / n;
    ss.mean_y = a.y / n;
    ss.sd_x = std::sqrt(std::max(0.0, a.xx / n - ss.mean_x * ss.mean_x));
    ss.sd_y = std::sqrt(std::max(0.0, a.yy / n - ss.mean_y * ss.mean_y));
    ss.cov_xy = a.xy / n - ss.mean_x * ss.mean_y;
    ss.beta_mean = a.b / n;
    ss.beta_sd = std::sqrt(std::max(0.0, a.bb / n - ss.beta_mean * ss.beta_mean));
    res.sites.push_back(ss);
  }
  return res;
}

// ---------------------------------------------------------------------------
// Initialization from detection.

HierState initial_state_from_fits(const HierData& data,
                                  std::span<const GaussianPeakFit> a_fits,
                                  std::span<const GaussianPeakFit> b_fits) {
  const int n_a = data.n_a();
  const int n_b = data.n_b();
  if (static_cast<int>(a_fits.size()) != n_a || static_cast<int>(b_fits.size()) != n_b)
    throw DomainError("initial_state_from_fits: fit counts do not match");

  HierState st;
  st.beta_a.resize(n_a);
  st.beta_b.resize(n_b);
  st.s_a.resize(n_a);
  st.s_b.resize(n_b);

  double z_sum = 0.0, rss_sum = 0.0;
  long px_sum = 0;
  auto psi_from = [](const GaussianPeakFit& f) {
    // Exp(-d^2/sigma^2) versus exp(-d^2/(2 psi^2)): psi = sigma / sqrt(2).
    return std::sqrt(f.sigma1 * f.sigma2) / std::sqrt(2.0);
  };
  double psi_a = 0.0, psi_b = 0.0;
  for (int j = 0; j < n_a; ++j) {
    st.beta_a[j] = a_fits[j].amplitude;
    st.s_a[j] = a_fits[j].center;
    z_sum += a_fits[j].background;
    rss_sum += a_fits[j].rss;
    px_sum += static_cast<long>(data.a_windows[j].size());
    psi_a += psi_from(a_fits[j]);
  }
  for (int j = 0; j < n_b; ++j) {
    st.beta_b[j] = b_fits[j].amplitude;
    st.s_b[j] = b_fits[j].center;
    z_sum += b_fits[j].background;
    rss_sum += b_fits[j].rss;
    px_sum += static_cast<long>(data.b_windows[j].size());
    psi_b += psi_from(b_fits[j]);
  }
  st.beta0 = z_sum / static_cast<double>(n_a + n_b);
  st.psi_a = psi_a / n_a;
  st.psi_b = psi_b / n_b;
  st.sigma2 = std::max(rss_sum / static_cast<double>(px_sum), 1e-8);
  st.r_pix = 0.5;
  st.rho_pix = 3.0;

  auto moments = [](const std::vector<double>& v, double& mean, double& var) {
    mean = mean_of(v);
    var = 0.0;
    for (double x : v) var += (x - mean) * (x - mean);
    var = std::max(var / static_cast<double>(v.size() > 1 ? v.size() - 1 : 1), 1e-8);
  };
  moments(st.beta_a, st.mu_beta_a, st.var_beta_a);
  moments(st.beta_b, st.mu_beta_b, st.var_beta_b);

  // Pooled OLS of displacement on psi for the process-layer start.
  const ProcessVectors pv =
      process_vectors(data.geometry, st.s_b, st.beta_b, st.s_a);
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double nn = 2.0 * n_a;
  for (int j = 0; j < n_a; ++j) {
    sx += pv.psi_x[j] + pv.psi_y[j];
    sy += pv.delta_x[j] + pv.delta_y[j];
    sxx += pv.psi_x[j] * pv.psi_x[j] + pv.psi_y[j] * pv.psi_y[j];
    sxy += pv.psi_x[j] * pv.delta_x[j] + pv.psi_y[j] * pv.delta_y[j];
  }
  const double mx = sx / nn, my = sy / nn;
  const double denom = sxx - nn * mx * mx;
  st.alpha1 = denom > 0.0 ? (sxy - nn * mx * my) / denom : 0.0;
  st.alpha0 = my - st.alpha1 * mx;
  double rss = 0.0;
  for (int j = 0; j < n_a; ++j) {
    const double ex = pv.delta_x[j] - st.alpha0 - st.alpha1 * pv.psi_x[j];
    const double ey = pv.delta_y[j] - st.alpha0 - st.alpha1 * pv.psi_y[j];
    rss += ex * ex + ey * ey;
  }
  st.sigma2_a = std::max(rss / nn, 1e-10);
  st.r = 0.5;
  st.rho = 2.0 * data.geometry.spacing;

  double bss = 0.0;
  for (int j = 0; j < n_b; ++j) {
    const Vec2 d = st.s_b[j] - data.geometry.b_means[j];
    bss += d.x * d.x + d.y * d.y;
  }
  st.sigma2_b = std::max(bss / (2.0 * n_b), 1e-10);
  st.gamma = st.alpha1;
  st.eta = 1;
  return st;
}

void ground_priors_from_fits(HierPriors& priors,
                             std::span<const GaussianPeakFit> a_fits,
                             std::span<const GaussianPeakFit> b_fits) {
  auto ground = [](std::span<const GaussianPeakFit> fits, double& mean_out,
                   double& var_out) {
    std::vector<double> amp(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) amp[i] = fits[i].amplitude;
    mean_out = mean_of(amp);
    const double sd = sd_of(amp);
    var_out = std::max(sd * sd, 1e-8);
  };
  ground(a_fits, priors.mu_beta_prior_mean_a, priors.sigma2_beta_prior_mean_a);
  ground(b_fits, priors.mu_beta_prior_mean_b, priors.sigma2_beta_prior_mean_b);
}

}  // namespace latticeme
