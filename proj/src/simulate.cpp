#include "latticeme/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "latticeme/covariance.hpp"
#include "latticeme/errors.hpp"
#include "latticeme/kernel.hpp"
#include "latticeme/simd.hpp"

namespace latticeme {

int SimConfig::effective_margin() const {
  return margin > 0 ? margin : std::max(h_a, h_b) + 7;
}

void SimConfig::validate() const {
  if (n_b_per_side < 2) throw DomainError("sim config: n_b_per_side must be >= 2");
  if (!(spacing > 0.0)) throw DomainError("sim config: spacing must be positive");
  for (auto [v, name] : {std::pair{sigma_b, "sigma_b"}, {sd_beta_a, "sd_beta_a"},
                         {sd_beta_b, "sd_beta_b"}, {sigma_a, "sigma_a"},
                         {psi_a, "psi_a"}, {psi_b, "psi_b"}, {sigma, "sigma"},
                         {rho, "rho"}, {rho_pix, "rho_pix"},
                         {background_sd, "background_sd"}})
    if (!(v > 0.0)) throw DomainError(std::string("sim config: ") + name + " must be positive");
  for (auto [v, name] : {std::pair{r, "r"}, {r_pix, "r_pix"}})
    if (!(v >= 0.0 && v <= 1.0))
      throw DomainError(std::string("sim config: ") + name + " must lie in [0,1]");
  if (h_a < 1 || h_b < 1) throw DomainError("sim config: half-widths must be >= 1");
  // Buffered generation boxes are 2(h+2)+1 wide and must not overlap. Box
  // overlap is per-axis: the tightest pair is A-B, offset spacing/2 in each
  // axis, so spacing/2 must clear both buffered half-widths plus a rounding
  // and jitter margin of 2 pixels.
  const double closest_axis = spacing / 2.0;
  const double reach = static_cast<double>((h_a + 2) + (h_b + 2) + 2);
  if (closest_axis <= reach) {
    std::ostringstream msg;
    msg << "sim config: buffered boxes would overlap (spacing " << spacing
        << " gives per-axis A-B offset " << closest_axis << " <= box reach "
        << reach << ")";
    throw DomainError(msg.str());
  }
}

ProcessVectors process_vectors(const LatticeGeometry& geom,
                               std::span<const Vec2> b_locations,
                               std::span<const double> b_betas,
                               std::span<const Vec2> a_locations) {
  const int n_a = geom.n_a();
  ProcessVectors pv;
  pv.delta_x.resize(n_a);
  pv.delta_y.resize(n_a);
  pv.psi_x.resize(n_a);
  pv.psi_y.resize(n_a);
  for (int j = 0; j < n_a; ++j) {
    Vec2 locs[4];
    double betas[4];
    for (int k = 0; k < 4; ++k) {
      locs[k] = b_locations[geom.a_neighbors[j][k]];
      betas[k] = b_betas[geom.a_neighbors[j][k]];
    }
    const Vec2 u = unweighted_center(locs);
    const Vec2 w = weighted_center(locs, betas);
    pv.delta_x[j] = a_locations[j].x - u.x;
    pv.delta_y[j] = a_locations[j].y - u.y;
    pv.psi_x[j] = w.x - u.x;
    pv.psi_y[j] = w.y - u.y;
  }
  return pv;
}

namespace {

// Buffered generation box around one atom.
struct GenBox {
  int cx, cy, half;
};

}  // namespace

SyntheticDataset simulate_dataset(const SimConfig& cfg, const Rng& rng) {
  cfg.validate();
  const int n = cfg.n_b_per_side;
  const int m0 = cfg.effective_margin();
  const Vec2 origin{static_cast<double>(m0 + 1), static_cast<double>(m0 + 1)};

  SyntheticDataset ds;
  ds.config = cfg;
  ds.geometry = build_geometry(n, cfg.spacing, origin);
  const int n_b = ds.geometry.n_b();
  const int n_a = ds.geometry.n_a();

  // B-site locations around the grid means.
  Rng rb = rng.child("b_sites");
  std::vector<Vec2> b_loc(n_b);
  for (int j = 0; j < n_b; ++j)
    b_loc[j] = {ds.geometry.b_means[j].x + cfg.sigma_b * rb.normal(),
                ds.geometry.b_means[j].y + cfg.sigma_b * rb.normal()};

  // Intensity coefficients, B sites then A sites.
  Rng rbeta = rng.child("betas");
  std::vector<double> beta_b(n_b), beta_a(n_a);
  for (double& b : beta_b) b = cfg.mu_beta_b + cfg.sd_beta_b * rbeta.normal();
  for (double& b : beta_a) b = cfg.mu_beta_a + cfg.sd_beta_a * rbeta.normal();

  // A-site locations: mean from the process layer, GP residuals with the
  // distance matrix of the unweighted grid means.
  Rng ra = rng.child("a_sites");
  std::vector<Vec2> a_loc(n_a);
  {
    const Matrix d_a = distance_matrix(ds.geometry.a_means);
    const Matrix v = exp_cov_from_dist(d_a, {cfg.sigma_a * cfg.sigma_a, cfg.r, cfg.rho});
    const CovFactor f = factorize(v);
    std::vector<double> zero(n_a, 0.0);
    const std::vector<double> ex = sample_mvn(zero, f, ra);
    const std::vector<double> ey = sample_mvn(zero, f, ra);
    for (int j = 0; j < n_a; ++j) {
      Vec2 locs[4];
      double betas[4];
      for (int k = 0; k < 4; ++k) {
        locs[k] = b_loc[ds.geometry.a_neighbors[j][k]];
        betas[k] = beta_b[ds.geometry.a_neighbors[j][k]];
      }
      const Vec2 u = unweighted_center(locs);
      const Vec2 w = weighted_center(locs, betas);
      a_loc[j] = {u.x + cfg.alpha0 + cfg.alpha1 * (w.x - u.x) + ex[j],
                  u.y + cfg.alpha0 + cfg.alpha1 * (w.y - u.y) + ey[j]};
    }
  }

  // Image canvas: iid background first, boxes overwritten afterwards.
  const int size = static_cast<int>(std::ceil((n - 1) * cfg.spacing)) + 2 * m0 + 1;
  ds.image.width = size;
  ds.image.height = size;
  ds.image.intensities.resize(static_cast<std::size_t>(size) * size);
  {
    Rng rbg = rng.child("background");
    for (double& v : ds.image.intensities)
      v = cfg.beta0 + cfg.background_sd * rbg.normal();
  }

  // Buffered boxes: correlated pixels from the single-atom data layer.
  std::vector<GenBox> boxes;
  boxes.reserve(n_b + n_a);
  auto add_boxes = [&](const std::vector<Vec2>& locs, int half) {
    for (const Vec2& s : locs)
      boxes.push_back({round_half_away(s.x), round_half_away(s.y), half});
  };
  add_boxes(b_loc, cfg.h_b + 2);
  add_boxes(a_loc, cfg.h_a + 2);
  for (std::size_t i = 0; i < boxes.size(); ++i)
    for (std::size_t j = i + 1; j < boxes.size(); ++j) {
      const int reach = boxes[i].half + boxes[j].half;
      if (std::abs(boxes[i].cx - boxes[j].cx) <= reach &&
          std::abs(boxes[i].cy - boxes[j].cy) <= reach)
        throw DomainError("simulate_dataset: buffered boxes overlap; increase spacing");
    }

  // One pixel-noise factor per box size, shared across that type's boxes.
  auto noise_factor = [&](int half) {
    const Window probe = extract_window(ds.image, m0 + half + 1, m0 + half + 1, half);
    std::vector<Vec2> coords(probe.size());
    for (std::size_t k = 0; k < probe.size(); ++k) coords[k] = {probe.px[k], probe.py[k]};
    return factorize(exp_cov_matrix(coords, {cfg.sigma * cfg.sigma, cfg.r_pix, cfg.rho_pix}));
  };
  const CovFactor f_b = noise_factor(cfg.h_b + 2);
  const CovFactor f_a = noise_factor(cfg.h_a + 2);

  Rng rpix = rng.child("pixels");
  auto fill_box = [&](int site_id, const Vec2& s, double beta, double psi,
                      const GenBox& box, const CovFactor& f) {
    Window w = extract_window(ds.image, box.cx, box.cy, box.half);
    std::vector<double> mu(w.size());
    simd::kernels().gauss_weights(w.px.data(), w.py.data(), w.size(), s.x, s.y,
                                  -0.5 / (psi * psi), mu.data());
    for (double& v : mu) v = cfg.beta0 + beta * v;
    Rng rs = rpix.child(static_cast<std::uint64_t>(site_id));
    w.y = sample_mvn(mu, f, rs);
    embed_window(ds.image, w);
  };
  for (int j = 0; j < n_b; ++j)
    fill_box(j, b_loc[j], beta_b[j], cfg.psi_b, boxes[j], f_b);
  for (int j = 0; j < n_a; ++j)
    fill_box(n_b + j, a_loc[j], beta_a[j], cfg.psi_a, boxes[n_b + j], f_a);

  ds.truth.reserve(n_b + n_a);
  for (int j = 0; j < n_b; ++j)
    ds.truth.push_back({j, SiteType::B, b_loc[j], beta_b[j]});
  for (int j = 0; j < n_a; ++j)
    ds.truth.push_back({n_b + j, SiteType::A, a_loc[j], beta_a[j]});
  return ds;
}

SimChecks empirical_checks(const SyntheticDataset& ds) {
  const auto& g = ds.geometry;
  const int n_b = g.n_b();
  const int n_a = g.n_a();
  SimChecks c;

  auto moments = [](auto begin, auto end, double& mean, double& sd) {
    double s = 0.0, s2 = 0.0;
    std::size_t n = 0;
    for (auto it = begin; it != end; ++it, ++n) s += it->intensity;
    mean = s / static_cast<double>(n);
    for (auto it = begin; it != end; ++it) s2 += (it->intensity - mean) * (it->intensity - mean);
    sd = std::sqrt(s2 / static_cast<double>(n - 1));
  };
  moments(ds.truth.begin(), ds.truth.begin() + n_b, c.mean_beta_b, c.sd_beta_b);
  moments(ds.truth.begin() + n_b, ds.truth.end(), c.mean_beta_a, c.sd_beta_a);

  double ss = 0.0;
  for (int j = 0; j < n_b; ++j) {
    const Vec2 d = ds.b_site(j).location - g.b_means[j];
    ss += d.x * d.x + d.y * d.y;
  }
  c.sd_b_displacement = std::sqrt(ss / (2.0 * n_b));

  std::vector<Vec2> b_loc(n_b);
  std::vector<double> b_beta(n_b);
  std::vector<Vec2> a_loc(n_a);
  for (int j = 0; j < n_b; ++j) {
    b_loc[j] = ds.b_site(j).location;
    b_beta[j] = ds.b_site(j).intensity;
  }
  for (int j = 0; j < n_a; ++j) a_loc[j] = ds.a_site(j).location;
  const ProcessVectors pv = process_vectors(g, b_loc, b_beta, a_loc);

  // Pooled OLS of displacement on psi.
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  const double nn = 2.0 * n_a;
  for (int j = 0; j < n_a; ++j) {
    sx += pv.psi_x[j] + pv.psi_y[j];
    sy += pv.delta_x[j] + pv.delta_y[j];
    sxx += pv.psi_x[j] * pv.psi_x[j] + pv.psi_y[j] * pv.psi_y[j];
    sxy += pv.psi_x[j] * pv.delta_x[j] + pv.psi_y[j] * pv.delta_y[j];
  }
  const double mx = sx / nn, my = sy / nn;
  c.ols_slope = (sxy - nn * mx * my) / (sxx - nn * mx * mx);
  c.ols_intercept = my - c.ols_slope * mx;
  return c;
}

}  // namespace latticeme
