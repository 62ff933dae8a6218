#include <doctest.h>

#include <array>

#include "latticeme/lattice.hpp"
#include "latticeme/rng.hpp"

using namespace latticeme;

TEST_CASE("build_geometry counts and translation") {
  const auto g = build_geometry(19, 40.0, {21, 21});
  CHECK(g.n_b() == 361);
  CHECK(g.n_a() == 324);
  CHECK(g.b_means.size() == 361);
  CHECK(g.a_neighbors.size() == 324);
  for (const auto& nb : g.a_neighbors) {
    CHECK(nb.size() == 4);
  }

  const auto g2 = build_geometry(2, 10.0, {0, 0});
  CHECK(g2.n_b() == 4);
  CHECK(g2.n_a() == 1);
  const std::array<int, 4> expect = {0, 1, 2, 3};
  CHECK(g2.a_neighbors[0] == expect);

  const auto shifted = build_geometry(19, 40.0, {26, 26});
  for (std::size_t i = 0; i < g.b_means.size(); ++i) {
    CHECK(shifted.b_means[i].x - g.b_means[i].x == doctest::Approx(5.0));
    CHECK(shifted.b_means[i].y - g.b_means[i].y == doctest::Approx(5.0));
  }

  // Re-running yields identical maps.
  const auto g3 = build_geometry(19, 40.0, {21, 21});
  CHECK(g3.a_neighbors == g.a_neighbors);
}

TEST_CASE("centers") {
  const std::vector<Vec2> sq = {{0, 0}, {0, 2}, {2, 0}, {2, 2}};
  const Vec2 u = unweighted_center(sq);
  CHECK(u.x == doctest::Approx(1.0));
  CHECK(u.y == doctest::Approx(1.0));

  const std::vector<Vec2> same = {{3, 3}, {3, 3}, {3, 3}, {3, 3}};
  CHECK(unweighted_center(same).x == doctest::Approx(3.0));

  const std::vector<Vec2> big = {{0, 0}, {0, 40}, {40, 0}, {40, 40}};
  CHECK(unweighted_center(big).x == doctest::Approx(20.0));
  CHECK(unweighted_center(big).y == doctest::Approx(20.0));

  // equal betas reduce to the unweighted center
  const std::vector<double> eq = {2, 2, 2, 2};
  const Vec2 w_eq = weighted_center(sq, eq);
  CHECK(w_eq.x == doctest::Approx(u.x));
  CHECK(w_eq.y == doctest::Approx(u.y));

  // a single positive weight picks that location
  const std::vector<double> one = {1, 0, 0, 0};
  const Vec2 w_one = weighted_center(sq, one);
  CHECK(w_one.x == doctest::Approx(0.0));
  CHECK(w_one.y == doctest::Approx(0.0));

  // direct arithmetic oracle: unit square, betas (3,1,1,1)
  const std::vector<Vec2> unit = {{0, 0}, {1, 0}, {0, 1}, {1, 1}};
  const std::vector<double> b3 = {3, 1, 1, 1};
  const Vec2 w3 = weighted_center(unit, b3);
  CHECK(w3.x == doctest::Approx(1.0 / 3.0));
  CHECK(w3.y == doctest::Approx(1.0 / 3.0));

  const std::vector<double> zero = {0, 0, 0, 0};
  CHECK_THROWS_AS(weighted_center(sq, zero), DomainError);
}

TEST_CASE("both centers stay inside the hull and agree when betas are equal") {
  Rng rng(5);
  for (int rep = 0; rep < 200; ++rep) {
    std::vector<Vec2> locs(4);
    for (auto& l : locs) l = {10.0 * rng.uniform(), 10.0 * rng.uniform()};
    std::vector<double> betas(4);
    for (auto& b : betas) b = 0.1 + rng.uniform();
    const Vec2 u = unweighted_center(locs);
    const Vec2 w = weighted_center(locs, betas);
    double lo_x = 1e9, hi_x = -1e9, lo_y = 1e9, hi_y = -1e9;
    for (const auto& l : locs) {
      lo_x = std::min(lo_x, l.x);
      hi_x = std::max(hi_x, l.x);
      lo_y = std::min(lo_y, l.y);
      hi_y = std::max(hi_y, l.y);
    }
    for (const Vec2& c : {u, w}) {
      CHECK(c.x >= lo_x);
      CHECK(c.x <= hi_x);
      CHECK(c.y >= lo_y);
      CHECK(c.y <= hi_y);
    }
  }
}

TEST_CASE("fit_geometry recovers an affine grid") {
  const int n = 5;
  const Vec2 origin{30.5, 40.25};
  const Vec2 u{20.1, 0.3};
  const Vec2 v{-0.2, 19.8};
  std::vector<Vec2> locs;
  std::vector<GridIndex> idx;
  Rng rng(9);
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      Vec2 p = origin + static_cast<double>(ix) * u + static_cast<double>(iy) * v;
      p.x += 0.01 * rng.normal();
      p.y += 0.01 * rng.normal();
      locs.push_back(p);
      idx.push_back({ix, iy});
    }
  const auto g = fit_geometry(locs, idx, n);
  CHECK(g.n_b() == n * n);
  for (std::size_t i = 0; i < locs.size(); ++i) {
    CHECK(g.b_means[i].x == doctest::Approx(locs[i].x).epsilon(0.01));
    CHECK(g.b_means[i].y == doctest::Approx(locs[i].y).epsilon(0.01));
  }
  CHECK(g.spacing == doctest::Approx(0.5 * (std::hypot(u.x, u.y) + std::hypot(v.x, v.y)))
                         .epsilon(1e-3));
}
