#include <doctest.h>

#include <cmath>

#include "latticeme/simulate.hpp"

using namespace latticeme;

TEST_CASE("paper defaults produce the right counts and structure") {
  SimConfig cfg;  // paper defaults
  cfg.n_b_per_side = 19;
  const SyntheticDataset ds = simulate_dataset(cfg, Rng(1));
  CHECK(ds.geometry.n_b() == 361);
  CHECK(ds.geometry.n_a() == 324);
  CHECK(ds.truth.size() == 685);
  CHECK(ds.image.width == ds.image.height);
  CHECK(ds.image.width >= 18 * 40);
}

TEST_CASE("degenerate noise collapses A sites on the unweighted centers") {
  SimConfig cfg;
  cfg.n_b_per_side = 4;
  cfg.sigma_a = 1e-9;
  cfg.alpha0 = 0.0;
  cfg.alpha1 = 0.0;
  const SyntheticDataset ds = simulate_dataset(cfg, Rng(7));
  for (int j = 0; j < ds.geometry.n_a(); ++j) {
    Vec2 u{0, 0};
    for (int k : ds.geometry.a_neighbors[j]) u = u + ds.b_site(k).location;
    u = 0.25 * u;
    CHECK(std::abs(ds.a_site(j).location.x - u.x) < 1e-6);
    CHECK(std::abs(ds.a_site(j).location.y - u.y) < 1e-6);
  }
}

TEST_CASE("generation is a pure function of config and seed") {
  SimConfig cfg;
  cfg.n_b_per_side = 3;
  const SyntheticDataset a = simulate_dataset(cfg, Rng(99));
  const SyntheticDataset b = simulate_dataset(cfg, Rng(99));
  REQUIRE(a.image.intensities.size() == b.image.intensities.size());
  for (std::size_t i = 0; i < a.image.intensities.size(); ++i)
    CHECK(a.image.intensities[i] == b.image.intensities[i]);
  for (std::size_t i = 0; i < a.truth.size(); ++i) {
    CHECK(a.truth[i].location.x == b.truth[i].location.x);
    CHECK(a.truth[i].intensity == b.truth[i].intensity);
  }
  const SyntheticDataset c = simulate_dataset(cfg, Rng(100));
  CHECK(a.truth[0].location.x != c.truth[0].location.x);
}

TEST_CASE("pixels outside the buffered boxes are pure background") {
  SimConfig cfg;
  cfg.n_b_per_side = 3;
  cfg.seed = 0;
  const SyntheticDataset ds = simulate_dataset(cfg, Rng(11));
  // Change every atom-related stream by reusing the seed but a different
  // config field that only affects box interiors: compare two datasets that
  // share the background stream.
  SimConfig cfg2 = cfg;
  cfg2.mu_beta_a = cfg.mu_beta_a * 2.0;
  const SyntheticDataset ds2 = simulate_dataset(cfg2, Rng(11));

  // Collect buffered-box membership.
  const int buffer_a = cfg.h_a + 2, buffer_b = cfg.h_b + 2;
  auto in_any_box = [&](int x, int y) {
    for (const auto& site : ds.truth) {
      const int h = site.type == SiteType::A ? buffer_a : buffer_b;
      const int cx = round_half_away(site.location.x);
      const int cy = round_half_away(site.location.y);
      if (std::abs(x - cx) <= h && std::abs(y - cy) <= h) return true;
    }
    return false;
  };
  int outside = 0;
  for (int y = 1; y <= ds.image.height; y += 3)
    for (int x = 1; x <= ds.image.width; x += 3) {
      if (in_any_box(x, y)) continue;
      ++outside;
      CHECK(ds.image.at(x, y) == ds2.image.at(x, y));
    }
  CHECK(outside > 100);
}

TEST_CASE("moment checks against the generating values") {
  SimConfig cfg;
  cfg.n_b_per_side = 10;
  double slope_sum = 0.0;
  double beta_b_mean_sum = 0.0;
  double sd_b_sum = 0.0;
  const int reps = 40;
  for (int rep = 0; rep < reps; ++rep) {
    const SyntheticDataset ds = simulate_dataset(cfg, Rng(1000 + rep));
    const SimChecks c = empirical_checks(ds);
    slope_sum += c.ols_slope;
    beta_b_mean_sum += c.mean_beta_b;
    sd_b_sum += c.sd_b_displacement;
  }
  // Pooled OLS on the true quantities estimates alpha1 without attenuation.
  CHECK(slope_sum / reps == doctest::Approx(-0.15).epsilon(0.15));
  CHECK(beta_b_mean_sum / reps == doctest::Approx(1425.0).epsilon(0.006));
  CHECK(sd_b_sum / reps == doctest::Approx(0.25).epsilon(0.05));
}

TEST_CASE("overlapping buffered boxes are rejected") {
  SimConfig cfg;
  cfg.n_b_per_side = 3;
  cfg.spacing = 28.0;  // per-axis A-B offset 14 <= reach 17
  CHECK_THROWS_AS(cfg.validate(), DomainError);
}
