#include "latticeme/pipeline.hpp"

#include <cmath>
#include <sstream>

#include "latticeme/errors.hpp"

namespace latticeme {
namespace {

// Clamp a window center so the window stays inside the image.
int clamp_center(double c, int half, int extent) {
  int ci = round_half_away(c);
  return std::min(std::max(ci, half + 1), extent - half);
}

}  // namespace

DetectOutput detect_sites(const Image& img, std::span<const SiteSpec> sites,
                          int h_a, int h_b, int n_per_side) {
  const int n = n_per_side;
  DetectOutput out;
  out.n_per_side = n;
  out.a_fits.resize(static_cast<std::size_t>(n - 1) * (n - 1));
  out.b_fits.resize(static_cast<std::size_t>(n) * n);
  out.a_sites.resize(out.a_fits.size());
  out.b_sites.resize(out.b_fits.size());
  std::vector<bool> seen_a(out.a_fits.size(), false), seen_b(out.b_fits.size(), false);

  for (const SiteSpec& s : sites) {
    const bool is_a = s.type == SiteType::A;
    const int side = is_a ? n - 1 : n;
    if (s.grid.ix < 0 || s.grid.ix >= side || s.grid.iy < 0 || s.grid.iy >= side) {
      std::ostringstream msg;
      msg << "detect_sites: site " << s.id << " grid index (" << s.grid.ix << ","
          << s.grid.iy << ") outside a " << side << "x" << side << " grid";
      throw DomainError(msg.str());
    }
    const std::size_t idx = static_cast<std::size_t>(s.grid.iy) * side + s.grid.ix;
    auto& seen = is_a ? seen_a : seen_b;
    if (seen[idx]) throw DomainError("detect_sites: duplicate grid index");
    seen[idx] = true;

    const int h = is_a ? h_a : h_b;
    const int cx = clamp_center(s.approx.x, h, img.width);
    const int cy = clamp_center(s.approx.y, h, img.height);
    const Window w = extract_window(img, cx, cy, h, s.id);
    (is_a ? out.a_fits : out.b_fits)[idx] = fit_gaussian_peak(w);
    (is_a ? out.a_sites : out.b_sites)[idx] = s;
  }
  for (std::size_t i = 0; i < seen_a.size(); ++i)
    if (!seen_a[i]) throw DomainError("detect_sites: missing A-site grid entries");
  for (std::size_t i = 0; i < seen_b.size(); ++i)
    if (!seen_b[i]) throw DomainError("detect_sites: missing B-site grid entries");
  return out;
}

FitInputs prepare_fit(const Image& img, std::span<const SiteSpec> sites, int h_a,
                      int h_b, int n_per_side, const HierPriors& base_priors,
                      bool strict_baseline) {
  DetectOutput det = detect_sites(img, sites, h_a, h_b, n_per_side);

  // Expected grid anchored to the detected B locations.
  std::vector<Vec2> b_centers(det.b_fits.size());
  std::vector<GridIndex> b_index(det.b_fits.size());
  for (std::size_t i = 0; i < det.b_fits.size(); ++i) {
    const auto& f = det.b_fits[i];
    b_centers[i] = f.converged ? f.center : det.b_sites[i].approx;
    b_index[i] = det.b_sites[i].grid;
  }
  LatticeGeometry geom = fit_geometry(b_centers, b_index, n_per_side);

  // Analysis windows at the rounded location estimates.
  auto build_windows = [&](std::span<const GaussianPeakFit> fits,
                           std::span<const SiteSpec> specs, int h) {
    std::vector<Window> ws;
    ws.reserve(fits.size());
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const Vec2 c = fits[i].converged ? fits[i].center : specs[i].approx;
      ws.push_back(extract_window(img, clamp_center(c.x, h, img.width),
                                  clamp_center(c.y, h, img.height), h,
                                  specs[i].id));
    }
    return ws;
  };
  std::vector<Window> a_windows = build_windows(det.a_fits, det.a_sites, h_a);
  std::vector<Window> b_windows = build_windows(det.b_fits, det.b_sites, h_b);

  FitInputs fit{HierData::build(std::move(geom), std::move(a_windows),
                                std::move(b_windows)),
                base_priors,
                {},
                {},
                {}};
  ground_priors_from_fits(fit.priors, det.a_fits, det.b_fits);
  fit.init = initial_state_from_fits(fit.data, det.a_fits, det.b_fits);

  // Keep every initial location inside its (possibly clamped) window.
  auto clamp_loc = [](Vec2 s, const Window& w) {
    s.x = std::min(std::max(s.x, static_cast<double>(w.cx - w.half_width)),
                   static_cast<double>(w.cx + w.half_width));
    s.y = std::min(std::max(s.y, static_cast<double>(w.cy - w.half_width)),
                   static_cast<double>(w.cy + w.half_width));
    return s;
  };
  for (int j = 0; j < fit.data.n_a(); ++j)
    fit.init.s_a[j] = clamp_loc(fit.init.s_a[j], fit.data.a_windows[j]);
  for (int j = 0; j < fit.data.n_b(); ++j)
    fit.init.s_b[j] = clamp_loc(fit.init.s_b[j], fit.data.b_windows[j]);

  fit.baseline = build_baseline_data(fit.data.geometry, det.a_fits, det.b_fits,
                                     strict_baseline);
  fit.detection = std::move(det);
  return fit;
}

}  // namespace latticeme
