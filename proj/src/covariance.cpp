#include "latticeme/covariance.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "latticeme/simd.hpp"
#include "levmar.hpp"

namespace latticeme {

void ExpCovParams::validate() const {
  if (!(sigma2 > 0.0) || !std::isfinite(sigma2))
    throw DomainError("ExpCovParams: sigma2 must be positive");
  if (!(r >= 0.0 && r <= 1.0)) throw DomainError("ExpCovParams: r must lie in [0,1]");
  if (!(rho > 0.0) || !std::isfinite(rho))
    throw DomainError("ExpCovParams: rho must be positive");
}

Matrix distance_matrix(std::span<const Vec2> coords) {
  const std::size_t n = coords.size();
  Matrix d(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < i; ++j) {
      const double v = dist(coords[i], coords[j]);
      d(i, j) = v;
      d(j, i) = v;
    }
  return d;
}

Matrix exp_cov_from_dist(const Matrix& dist, const ExpCovParams& p) {
  p.validate();
  const std::size_t n = dist.rows();
  Matrix c(n, n);
  const auto& k = simd::kernels();
  for (std::size_t i = 0; i < n; ++i)
    k.scaled_exp(dist.row(i), n, -1.0 / p.rho, p.sigma2 * p.r, c.row(i));
  for (std::size_t i = 0; i < n; ++i) c(i, i) = p.sigma2;
  return c;
}

Matrix exp_cov_matrix(std::span<const Vec2> coords, const ExpCovParams& p) {
  if (coords.empty()) throw DomainError("exp_cov_matrix: empty coordinate list");
  return exp_cov_from_dist(distance_matrix(coords), p);
}

CovFactor factorize(const Matrix& cov) { return Cholesky::compute(cov); }

double quad_form(const CovFactor& f, std::span<const double> v) {
  if (v.size() != f.dim()) throw DomainError("quad_form: dimension mismatch");
  std::vector<double> work(v.size());
  return f.quad_inv(v.data(), work.data());
}

double bilinear_form(const CovFactor& f, std::span<const double> u,
                     std::span<const double> v) {
  if (u.size() != f.dim() || v.size() != f.dim())
    throw DomainError("bilinear_form: dimension mismatch");
  std::vector<double> wu(u.begin(), u.end());
  std::vector<double> wv(v.begin(), v.end());
  f.solve_lower(wu.data());
  f.solve_lower(wv.data());
  return simd::kernels().dot(wu.data(), wv.data(), u.size());
}

std::vector<double> sample_mvn(std::span<const double> mean, const CovFactor& f,
                               Rng& rng) {
  if (mean.size() != f.dim()) throw DomainError("sample_mvn: dimension mismatch");
  std::vector<double> z(mean.size());
  for (double& v : z) v = rng.normal();
  std::vector<double> out(mean.size());
  f.mul_lower(z.data(), out.data());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] += mean[i];
  return out;
}

VariogramEstimate empirical_variogram(std::span<const Vec2> coords,
                                      std::span<const double> residuals,
                                      int n_bins, double max_dist) {
  if (coords.size() != residuals.size())
    throw DomainError("empirical_variogram: coords/residuals length mismatch");
  if (coords.size() < 2) throw DomainError("empirical_variogram: need at least two points");
  if (!(max_dist > 0.0)) throw DomainError("empirical_variogram: max_dist must be positive");
  if (n_bins < 1) throw DomainError("empirical_variogram: need at least one bin");

  const double width = max_dist / n_bins;
  VariogramEstimate vg;
  vg.bin_centers.resize(n_bins);
  vg.semivariances.assign(n_bins, 0.0);
  vg.counts.assign(n_bins, 0);
  for (int b = 0; b < n_bins; ++b) vg.bin_centers[b] = (b + 0.5) * width;

  const std::size_t n = coords.size();
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i + 1; j < n; ++j) {
      const double d = dist(coords[i], coords[j]);
      if (d <= 0.0 || d > max_dist) continue;
      int b = static_cast<int>(d / width);
      if (b >= n_bins) b = n_bins - 1;  // d == max_dist
      const double diff = residuals[i] - residuals[j];
      vg.semivariances[b] += diff * diff;
      ++vg.counts[b];
    }
  for (int b = 0; b < n_bins; ++b) {
    if (vg.counts[b] > 0)
      vg.semivariances[b] /= 2.0 * static_cast<double>(vg.counts[b]);
    else
      vg.semivariances[b] = std::numeric_limits<double>::quiet_NaN();
  }
  return vg;
}

double exp_variogram_value(const ExpCovParams& p, double d) {
  return p.sigma2 - p.sigma2 * p.r * std::exp(-d / p.rho);
}

namespace {

inline double logit(double r) { return std::log(r / (1.0 - r)); }
inline double expit(double t) { return 1.0 / (1.0 + std::exp(-t)); }

ExpCovParams untransform(const std::vector<double>& t) {
  return {std::exp(t[0]), expit(t[1]), std::exp(t[2])};
}

}  // namespace

ExpCovParams fit_exp_variogram(const VariogramEstimate& vg) {
  std::vector<double> d, g, w;
  for (std::size_t b = 0; b < vg.bin_centers.size(); ++b) {
    if (vg.counts[b] <= 0 || !std::isfinite(vg.semivariances[b])) continue;
    d.push_back(vg.bin_centers[b]);
    g.push_back(vg.semivariances[b]);
    w.push_back(std::sqrt(static_cast<double>(vg.counts[b])));
  }
  if (d.size() < 3)
    throw DomainError("fit_exp_variogram: need at least three non-missing bins");

  // Moment-based starting point: sill from the top bins, nugget from the
  // first bin, range from the 63% rise distance.
  double sill = 0.0;
  {
    const std::size_t k = std::max<std::size_t>(1, d.size() / 3);
    for (std::size_t i = d.size() - k; i < d.size(); ++i) sill += g[i];
    sill /= static_cast<double>(k);
  }
  if (!(sill > 0.0)) sill = *std::max_element(g.begin(), g.end());
  if (!(sill > 0.0)) sill = 1e-12;
  double nugget = std::clamp(g.front(), 0.0, sill);
  double r0 = std::clamp(1.0 - nugget / sill, 0.02, 0.98);
  double rho0 = d.back() / 3.0;
  const double rise = nugget + 0.632 * (sill - nugget);
  for (std::size_t i = 0; i < d.size(); ++i)
    if (g[i] >= rise) {
      rho0 = std::max(d[i], d.front() * 0.5);
      break;
    }

  const std::size_t m = d.size();
  auto eval = [&](const std::vector<double>& t, std::vector<double>& resid, Matrix* jac) {
    const double sigma2 = std::exp(t[0]);
    const double r = expit(t[1]);
    const double rho = std::exp(t[2]);
    for (std::size_t i = 0; i < m; ++i) {
      const double e = std::exp(-d[i] / rho);
      const double gamma = sigma2 - sigma2 * r * e;
      resid[i] = w[i] * (gamma - g[i]);
      if (jac) {
        (*jac)(i, 0) = w[i] * gamma;                            // d/dlog(sigma2)
        (*jac)(i, 1) = w[i] * (-sigma2 * e) * r * (1.0 - r);    // d/dlogit(r)
        (*jac)(i, 2) = w[i] * (-sigma2 * r * e * d[i] / rho);   // d/dlog(rho)
      }
    }
  };
  // A range below half the first bin is indistinguishable from pure nugget
  // (the ridge r -> 1, rho -> 0 fits any flat variogram); keep rho inside
  // the resolved band so iid data comes back as r ~ 0.
  const double log_rho_lo = std::log(0.5 * d.front());
  const double log_rho_hi = std::log(50.0 * d.back());
  auto project = [&](std::vector<double>& t) {
    t[0] = std::clamp(t[0], -60.0, 60.0);
    t[1] = std::clamp(t[1], -30.0, 30.0);
    t[2] = std::clamp(t[2], log_rho_lo, log_rho_hi);
  };

  detail::LevMarOptions opt;
  opt.max_iter = 1000;
  opt.tol_rel_rss = 1e-9;
  opt.tol_step = 1e-7;
  const auto res = detail::levmar(eval, {std::log(sill), logit(r0), std::log(rho0)}, m, opt, project);
  const ExpCovParams fitted = untransform(res.x);
  if (!res.converged) {
    std::ostringstream msg;
    msg << "fit_exp_variogram: no convergence after " << res.iterations
        << " iterations (weighted rss " << res.rss << ")";
    throw VariogramFitError(msg.str(), fitted);
  }
  return fitted;
}

}  // namespace latticeme
