#include "latticeme/chain.hpp"

#include <algorithm>
#include <cmath>

#include "latticeme/errors.hpp"

namespace latticeme {

double mean_of(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double sd_of(std::span<const double> v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

std::pair<double, double> hpd_interval(std::span<const double> samples, double level) {
  const std::size_t n = samples.size();
  if (n < 100) throw DomainError("hpd_interval: need at least 100 samples");
  if (!(level > 0.0 && level < 1.0))
    throw DomainError("hpd_interval: level must lie in (0,1)");
  std::vector<double> s(samples.begin(), samples.end());
  std::sort(s.begin(), s.end());
  auto gap = static_cast<std::size_t>(std::ceil(level * static_cast<double>(n)));
  gap = std::clamp<std::size_t>(gap, 1, n - 1);
  std::size_t best = 0;
  double best_width = s[gap] - s[0];
  for (std::size_t i = 1; i + gap < n; ++i) {
    const double w = s[i + gap] - s[i];
    if (w < best_width) {
      best_width = w;
      best = i;
    }
  }
  return {s[best], s[best + gap]};
}

ParamSummary summarize_chain(const Chain& c, double level) {
  ParamSummary ps;
  ps.name = c.name;
  ps.mean = mean_of(c.draws);
  ps.sd = sd_of(c.draws);
  const auto [lo, hi] = hpd_interval(c.draws, level);
  ps.hpd_lo = lo;
  ps.hpd_hi = hi;
  return ps;
}

}  // namespace latticeme
