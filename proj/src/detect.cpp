#include "latticeme/detect.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "latticeme/errors.hpp"
#include "levmar.hpp"

namespace latticeme {
namespace {

constexpr double kPi = std::numbers::pi;

double median_of(std::vector<double> v) {
  const std::size_t n = v.size();
  std::nth_element(v.begin(), v.begin() + n / 2, v.end());
  double hi = v[n / 2];
  if (n % 2 == 1) return hi;
  std::nth_element(v.begin(), v.begin() + n / 2 - 1, v.end());
  return 0.5 * (v[n / 2 - 1] + hi);
}

double sd_of(const std::vector<double>& v) {
  double mean = 0.0;
  for (double x : v) mean += x;
  mean /= static_cast<double>(v.size());
  double ss = 0.0;
  for (double x : v) ss += (x - mean) * (x - mean);
  return std::sqrt(ss / static_cast<double>(v.size()));
}

// Pearson correlation; NaN when either side is constant.
double pearson(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  double ma = 0.0, mb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    ma += a[i];
    mb += b[i];
  }
  ma /= static_cast<double>(n);
  mb /= static_cast<double>(n);
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sab += (a[i] - ma) * (b[i] - mb);
    saa += (a[i] - ma) * (a[i] - ma);
    sbb += (b[i] - mb) * (b[i] - mb);
  }
  if (saa <= 0.0 || sbb <= 0.0) return std::numeric_limits<double>::quiet_NaN();
  return sab / std::sqrt(saa * sbb);
}

struct Gaussian1DFit {
  std::vector<double> values;
  bool ok = false;
};

Gaussian1DFit fit_gaussian_1d(const std::vector<double>& t, const std::vector<double>& y) {
  const std::size_t m = t.size();
  Gaussian1DFit out;
  out.values.assign(m, 0.0);
  const double ymin = *std::min_element(y.begin(), y.end());
  const double ymax = *std::max_element(y.begin(), y.end());
  if (!(ymax > ymin)) return out;
  const std::size_t imax = static_cast<std::size_t>(
      std::max_element(y.begin(), y.end()) - y.begin());
  // params: a, t0, s, z
  std::vector<double> x0 = {ymax - ymin, t[imax], (t.back() - t.front()) / 4.0, ymin};
  auto eval = [&](const std::vector<double>& x, std::vector<double>& resid, Matrix* jac) {
    const double a = x[0], t0 = x[1], s = x[2], z = x[3];
    for (std::size_t k = 0; k < m; ++k) {
      const double d = t[k] - t0;
      const double e = std::exp(-d * d / (2.0 * s * s));
      resid[k] = a * e + z - y[k];
      if (jac) {
        (*jac)(k, 0) = e;
        (*jac)(k, 1) = a * e * d / (s * s);
        (*jac)(k, 2) = a * e * d * d / (s * s * s);
        (*jac)(k, 3) = 1.0;
      }
    }
  };
  auto project = [](std::vector<double>& x) { x[2] = std::max(x[2], 1e-3); };
  detail::LevMarOptions opt;
  const auto res = detail::levmar(eval, x0, m, opt, project);
  const double a = res.x[0], t0 = res.x[1], s = res.x[2], z = res.x[3];
  for (std::size_t k = 0; k < m; ++k) {
    const double d = t[k] - t0;
    out.values[k] = a * std::exp(-d * d / (2.0 * s * s)) + z;
  }
  out.ok = true;
  return out;
}

}  // namespace

Vec2 weighted_centroid(const Window& w) {
  const double floor = *std::min_element(w.y.begin(), w.y.end());
  double total = 0.0;
  Vec2 c{0.0, 0.0};
  for (std::size_t k = 0; k < w.size(); ++k) {
    const double wk = w.y[k] - floor;
    total += wk;
    c.x += wk * w.px[k];
    c.y += wk * w.py[k];
  }
  if (!(total > 0.0))
    throw DomainError("weighted_centroid: window intensities are constant");
  return {c.x / total, c.y / total};
}

GaussianPeakFit fit_gaussian_peak(const Window& w) {
  GaussianPeakFit fit;
  const std::size_t m = w.size();

  const double z0 = median_of(w.y) - sd_of(w.y);
  const double ymax = *std::max_element(w.y.begin(), w.y.end());
  const double a0 = ymax - z0;
  Vec2 c0{static_cast<double>(w.cx), static_cast<double>(w.cy)};
  bool degenerate = false;
  try {
    c0 = weighted_centroid(w);
  } catch (const DomainError&) {
    degenerate = true;
  }
  const double s0 = std::max(0.5 * w.half_width, 0.5);

  fit.amplitude = a0;
  fit.center = c0;
  fit.sigma1 = fit.sigma2 = s0;
  fit.background = z0;
  if (degenerate || !(a0 > 0.0) || m < 7) {
    fit.converged = false;
    return fit;
  }

  // params: A, x0, y0, theta, sigma1, sigma2, Z
  std::vector<double> x0 = {a0, c0.x, c0.y, 0.0, s0, s0, z0};
  auto eval = [&](const std::vector<double>& x, std::vector<double>& resid, Matrix* jac) {
    const double a = x[0], cx = x[1], cy = x[2], th = x[3];
    const double s1 = x[4], s2 = x[5], z = x[6];
    const double ct = std::cos(th), st = std::sin(th);
    const double i1 = 1.0 / (s1 * s1), i2 = 1.0 / (s2 * s2);
    for (std::size_t k = 0; k < m; ++k) {
      const double dx = w.px[k] - cx;
      const double dy = w.py[k] - cy;
      const double u = dx * ct + dy * st;
      const double v = dx * st - dy * ct;
      const double e = std::exp(-(u * u * i1 + v * v * i2));
      resid[k] = a * e + z - w.y[k];
      if (jac) {
        const double ae = a * e;
        (*jac)(k, 0) = e;
        (*jac)(k, 1) = 2.0 * ae * (u * ct * i1 + v * st * i2);
        (*jac)(k, 2) = 2.0 * ae * (u * st * i1 - v * ct * i2);
        (*jac)(k, 3) = 2.0 * ae * u * v * (i1 - i2);
        (*jac)(k, 4) = 2.0 * ae * u * u / (s1 * s1 * s1);
        (*jac)(k, 5) = 2.0 * ae * v * v / (s2 * s2 * s2);
        (*jac)(k, 6) = 1.0;
      }
    }
  };
  auto project = [](std::vector<double>& x) {
    x[4] = std::max(x[4], 1e-3);
    x[5] = std::max(x[5], 1e-3);
  };
  detail::LevMarOptions opt;  // 200 iterations, 1e-10 rss / 1e-8 step
  const auto res = detail::levmar(eval, x0, m, opt, project);

  fit.amplitude = res.x[0];
  fit.center = {res.x[1], res.x[2]};
  fit.theta = res.x[3];
  fit.sigma1 = res.x[4];
  fit.sigma2 = res.x[5];
  fit.background = res.x[6];
  fit.rss = res.rss;
  fit.converged = res.converged;
  fit.iterations = res.iterations;

  // Canonical form: theta mod pi, then sigma1 >= sigma2 using the exact
  // (swap, theta+pi/2) symmetry of the model.
  fit.theta = std::fmod(fit.theta, kPi);
  if (fit.theta < 0.0) fit.theta += kPi;
  if (fit.sigma1 < fit.sigma2) {
    std::swap(fit.sigma1, fit.sigma2);
    fit.theta = std::fmod(fit.theta + 0.5 * kPi, kPi);
  }
  return fit;
}

TraceDiagnostic trace_diagnostic(std::span<const Window> windows) {
  if (windows.empty()) throw DomainError("trace_diagnostic: no windows");
  const int h = windows.front().half_width;
  for (const Window& w : windows)
    if (w.half_width != h)
      throw DomainError("trace_diagnostic: windows must share one size");

  const int width = 2 * h + 1;
  TraceDiagnostic td;
  td.offsets.resize(width);
  td.mean_horizontal.assign(width, 0.0);
  td.mean_vertical.assign(width, 0.0);
  for (int i = 0; i < width; ++i) td.offsets[i] = i - h;

  for (const Window& w : windows)
    for (int i = 0; i < width; ++i) {
      td.mean_horizontal[i] += w.y[static_cast<std::size_t>(h) * width + i];  // center row
      td.mean_vertical[i] += w.y[static_cast<std::size_t>(i) * width + h];    // center column
    }
  const double inv = 1.0 / static_cast<double>(windows.size());
  for (int i = 0; i < width; ++i) {
    td.mean_horizontal[i] *= inv;
    td.mean_vertical[i] *= inv;
  }

  const auto fh = fit_gaussian_1d(td.offsets, td.mean_horizontal);
  const auto fv = fit_gaussian_1d(td.offsets, td.mean_vertical);
  td.fit_horizontal = fh.values;
  td.fit_vertical = fv.values;
  td.corr_horizontal = fh.ok ? pearson(td.mean_horizontal, td.fit_horizontal)
                             : std::numeric_limits<double>::quiet_NaN();
  td.corr_vertical = fv.ok ? pearson(td.mean_vertical, td.fit_vertical)
                           : std::numeric_limits<double>::quiet_NaN();
  return td;
}

}  // namespace latticeme
