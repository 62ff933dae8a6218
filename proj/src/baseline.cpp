#include "latticeme/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "latticeme/covariance.hpp"
#include "latticeme/errors.hpp"
#include "latticeme/simd.hpp"

namespace latticeme {
namespace {

inline double logit(double p) { return std::log(p / (1.0 - p)); }
inline double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }
inline double loglogistic(double t) {
  return t - 2.0 * (t > 30.0 ? t : std::log1p(std::exp(t)));
}

}  // namespace

BaselineData build_baseline_data(const LatticeGeometry& geometry,
                                 std::span<const GaussianPeakFit> a_fits,
                                 std::span<const GaussianPeakFit> b_fits,
                                 bool strict) {
  const int n_a = geometry.n_a();
  const int n_b = geometry.n_b();
  if (static_cast<int>(a_fits.size()) != n_a || static_cast<int>(b_fits.size()) != n_b)
    throw DomainError("build_baseline_data: fit counts do not match the geometry");

  for (const auto& fits : {a_fits, b_fits})
    for (const auto& f : fits)
      if (!f.converged && strict)
        throw FitError("build_baseline_data: unconverged peak fit in strict mode");

  BaselineData d;
  for (int j = 0; j < n_a; ++j) {
    if (!a_fits[j].converged) {
      ++d.n_excluded;
      continue;
    }
    bool usable = true;
    Vec2 locs[4];
    double betas[4];
    for (int k = 0; k < 4; ++k) {
      const auto& bf = b_fits[geometry.a_neighbors[j][k]];
      if (!bf.converged) usable = false;
      locs[k] = bf.center;
      betas[k] = bf.amplitude;
    }
    if (!usable) {
      ++d.n_excluded;
      continue;
    }
    const Vec2 u = unweighted_center(locs);
    const Vec2 w = weighted_center(locs, betas);
    d.delta_x.push_back(a_fits[j].center.x - u.x);
    d.delta_y.push_back(a_fits[j].center.y - u.y);
    d.psi_x.push_back(w.x - u.x);
    d.psi_y.push_back(w.y - u.y);
    d.a_coords.push_back(a_fits[j].center);
  }
  if (d.a_coords.size() < 3)
    throw DomainError("build_baseline_data: too few usable A-sites");
  return d;
}

ChainSet run_baseline(const BaselineData& data, BaselineModel model,
                      const BaselinePriors& priors, const McmcSchedule& schedule) {
  const auto& kk = simd::kernels();
  const int n = static_cast<int>(data.a_coords.size());
  const Matrix dist = distance_matrix(data.a_coords);

  // State.
  double alpha0 = 0.0, alpha1 = 0.0;
  double r = model == BaselineModel::spatial ? priors.init_r : 0.0;
  double rho = priors.init_rho > 0.0 ? priors.init_rho : 0.0;
  if (rho <= 0.0) {
    double span = 0.0;
    for (int i = 0; i < n; ++i)
      for (int j2 = 0; j2 < i; ++j2) span = std::max(span, dist(i, j2));
    rho = std::max(span / 4.0, 1.0);
  }

  // OLS start for the regression part.
  {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double nn = 2.0 * n;
    for (int j = 0; j < n; ++j) {
      sx += data.psi_x[j] + data.psi_y[j];
      sy += data.delta_x[j] + data.delta_y[j];
      sxx += data.psi_x[j] * data.psi_x[j] + data.psi_y[j] * data.psi_y[j];
      sxy += data.psi_x[j] * data.delta_x[j] + data.psi_y[j] * data.delta_y[j];
    }
    const double mx = sx / nn, my = sy / nn;
    const double denom = sxx - nn * mx * mx;
    alpha1 = denom > 0.0 ? (sxy - nn * mx * my) / denom : 0.0;
    alpha0 = my - alpha1 * mx;
  }
  double sigma2_a = 0.0;
  for (int j = 0; j < n; ++j) {
    const double ex = data.delta_x[j] - alpha0 - alpha1 * data.psi_x[j];
    const double ey = data.delta_y[j] - alpha0 - alpha1 * data.psi_y[j];
    sigma2_a += ex * ex + ey * ey;
  }
  sigma2_a = std::max(sigma2_a / (2.0 * n), 1e-10);

  CovFactor fac = factorize(exp_cov_from_dist(dist, {sigma2_a, r, rho}));
  std::vector<double> so(n, 1.0);
  fac.solve_lower(so.data());
  double oo = kk.dot(so.data(), so.data(), n);

  Rng root(schedule.seed);
  Rng rng_a0 = root.child("alpha0");
  Rng rng_a1 = root.child("alpha1");
  Rng rng_s2 = root.child("sigma2_a");
  Rng rng_corr = root.child("corr");

  double log_step_r = std::log(priors.step_logit_r);
  double log_step_rho = std::log(priors.step_log_rho);
  long batch_r = 0, acc_r = 0, batch_idx_r = 0;
  long batch_rho = 0, acc_rho = 0, batch_idx_rho = 0;
  std::map<std::string, std::pair<long, long>> accept;

  std::vector<double> wx(n), wy(n), wp(n);
  auto quad_current = [&](double a0, double a1) {
    for (int j = 0; j < n; ++j) {
      wx[j] = data.delta_x[j] - a0 - a1 * data.psi_x[j];
      wy[j] = data.delta_y[j] - a0 - a1 * data.psi_y[j];
    }
    fac.solve_lower(wx.data());
    fac.solve_lower(wy.data());
    return kk.dot(wx.data(), wx.data(), n) + kk.dot(wy.data(), wy.data(), n);
  };

  ChainSet out;
  out.n_iter = schedule.iters;
  out.burn_in = schedule.burn_in;
  out.thin = schedule.thin;
  out.seed = schedule.seed;
  out.chains.push_back({"alpha0", {}});
  out.chains.push_back({"alpha1", {}});
  out.chains.push_back({"sigma2_a", {}});
  const bool spatial = model == BaselineModel::spatial;
  if (spatial) {
    out.chains.push_back({"r", {}});
    out.chains.push_back({"rho", {}});
  }

  const long total = schedule.burn_in + schedule.iters;
  for (long it = 0; it < total; ++it) {
    const bool adapting = priors.adapt.enabled && it < schedule.burn_in;

    // alpha0 | rest
    {
      const double v = 2.0 * oo + 1.0 / priors.alpha_var;
      double m = 0.0;
      for (int coord = 0; coord < 2; ++coord) {
        const auto& dvec = coord == 0 ? data.delta_x : data.delta_y;
        const auto& pvec = coord == 0 ? data.psi_x : data.psi_y;
        for (int j = 0; j < n; ++j) wx[j] = dvec[j] - alpha1 * pvec[j];
        fac.solve_lower(wx.data());
        m += kk.dot(wx.data(), so.data(), n);
      }
      alpha0 = m / v + std::sqrt(1.0 / v) * rng_a0.normal();
    }
    // alpha1 | rest
    {
      double v = 1.0 / priors.alpha_var;
      double m = 0.0;
      for (int coord = 0; coord < 2; ++coord) {
        const auto& dvec = coord == 0 ? data.delta_x : data.delta_y;
        const auto& pvec = coord == 0 ? data.psi_x : data.psi_y;
        std::memcpy(wp.data(), pvec.data(), n * sizeof(double));
        fac.solve_lower(wp.data());
        for (int j = 0; j < n; ++j) wx[j] = dvec[j] - alpha0;
        fac.solve_lower(wx.data());
        v += kk.dot(wp.data(), wp.data(), n);
        m += kk.dot(wp.data(), wx.data(), n);
      }
      alpha1 = m / v + std::sqrt(1.0 / v) * rng_a1.normal();
    }
    // sigma2_a | rest
    {
      const double q = quad_current(alpha0, alpha1);
      const double shape = priors.sigma2_a_shape + static_cast<double>(n);
      const double rate = priors.sigma2_a_rate + 0.5 * sigma2_a * q;
      const double s2 = rng_s2.inv_gamma(shape, rate);
      const double ratio = s2 / sigma2_a;
      fac.rescale(ratio);
      const double inv_sqrt = 1.0 / std::sqrt(ratio);
      for (double& v : so) v *= inv_sqrt;
      oo /= ratio;
      sigma2_a = s2;
    }
    // (r, rho) | rest by Metropolis on (logit r, log rho)
    if (spatial && priors.update_corr) {
      auto try_corr = [&](double r_new, double rho_new, double prior_delta,
                          double& log_step, long& batch, long& accs, long& bidx,
                          const char* block) {
        CovFactor fac_new;
        try {
          fac_new = factorize(exp_cov_from_dist(dist, {sigma2_a, r_new, rho_new}));
        } catch (const FactorizationError&) {
          ++accept[block].second;
          return;
        }
        const double q_old = quad_current(alpha0, alpha1);
        for (int j = 0; j < n; ++j) {
          wx[j] = data.delta_x[j] - alpha0 - alpha1 * data.psi_x[j];
          wy[j] = data.delta_y[j] - alpha0 - alpha1 * data.psi_y[j];
        }
        fac_new.solve_lower(wx.data());
        fac_new.solve_lower(wy.data());
        const double q_new =
            kk.dot(wx.data(), wx.data(), n) + kk.dot(wy.data(), wy.data(), n);
        const double la = -0.5 * (2.0 * (fac_new.log_det() - fac.log_det()) +
                                  (q_new - q_old)) +
                          prior_delta;
        auto& a = accept[block];
        ++a.second;
        const bool ok = std::log(rng_corr.uniform_pos()) < la;
        if (ok) {
          ++a.first;
          fac = std::move(fac_new);
          r = r_new;
          rho = rho_new;
          so.assign(n, 1.0);
          fac.solve_lower(so.data());
          oo = kk.dot(so.data(), so.data(), n);
        }
        if (adapting) {
          accs += ok ? 1 : 0;
          if (++batch >= priors.adapt.batch) {
            ++bidx;
            const double rate = static_cast<double>(accs) / batch;
            log_step += (rate - priors.adapt.target) / std::sqrt(static_cast<double>(bidx));
            log_step = std::clamp(log_step, -12.0, 5.0);
            accs = 0;
            batch = 0;
          }
        }
      };
      {
        const double t_old = logit(std::clamp(r, 1e-12, 1.0 - 1e-12));
        const double t_new = t_old + std::exp(log_step_r) * rng_corr.normal();
        try_corr(expit(t_new), rho, loglogistic(t_new) - loglogistic(t_old),
                 log_step_r, batch_r, acc_r, batch_idx_r, "r");
      }
      {
        const double t_old = std::log(rho);
        const double t_new = t_old + std::exp(log_step_rho) * rng_corr.normal();
        try_corr(r, std::exp(t_new),
                 -0.5 * (t_new * t_new - t_old * t_old) / priors.rho_log_var,
                 log_step_rho, batch_rho, acc_rho, batch_idx_rho, "rho");
      }
    }

    if (it >= schedule.burn_in && (it - schedule.burn_in) % schedule.thin == 0) {
      out.chains[0].draws.push_back(alpha0);
      out.chains[1].draws.push_back(alpha1);
      out.chains[2].draws.push_back(sigma2_a);
      if (spatial) {
        out.chains[3].draws.push_back(r);
        out.chains[4].draws.push_back(rho);
      }
    }
  }
  for (const auto& [block, counts] : accept)
    out.acceptance[block] =
        counts.second > 0 ? static_cast<double>(counts.first) / counts.second : 0.0;
  return out;
}

}  // namespace latticeme
