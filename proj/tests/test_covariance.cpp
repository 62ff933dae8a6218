#include <doctest.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "latticeme/covariance.hpp"
#include "latticeme/rng.hpp"
#include "support/dense_oracle.hpp"

using namespace latticeme;

namespace {

std::vector<Vec2> random_coords(Rng& rng, int n, double extent) {
  std::vector<Vec2> c(n);
  for (auto& p : c) p = {extent * rng.uniform(), extent * rng.uniform()};
  return c;
}

}  // namespace

TEST_CASE("exp_cov_matrix values and exact symmetry") {
  Rng rng(31);
  const auto coords = random_coords(rng, 20, 30.0);
  const ExpCovParams p{4.0, 0.6, 7.5};
  const Matrix c = exp_cov_matrix(coords, p);
  for (int i = 0; i < 20; ++i) {
    CHECK(c(i, i) == 4.0);  // diagonal is exactly sigma2
    for (int j = 0; j < i; ++j) {
      const double lo = c(i, j);
      const double hi = c(j, i);
      CHECK(std::memcmp(&lo, &hi, sizeof(double)) == 0);  // bitwise
      const double d = dist(coords[i], coords[j]);
      CHECK(c(i, j) == doctest::Approx(4.0 * 0.6 * std::exp(-d / 7.5)).epsilon(1e-12));
    }
  }

  // r = 0 gives sigma2 * I
  const Matrix diag = exp_cov_matrix(coords, {4.0, 0.0, 7.5});
  for (int i = 0; i < 20; ++i)
    for (int j = 0; j < 20; ++j) CHECK(diag(i, j) == (i == j ? 4.0 : 0.0));

  // distance rho gives sigma2 * r * exp(-1)
  const std::vector<Vec2> pair = {{0, 0}, {7.5, 0}};
  const Matrix two = exp_cov_matrix(pair, p);
  CHECK(two(0, 1) == doctest::Approx(4.0 * 0.6 * std::exp(-1.0)).epsilon(1e-14));

  CHECK_THROWS_AS(exp_cov_matrix(coords, {0.0, 0.5, 1.0}), DomainError);
  CHECK_THROWS_AS(exp_cov_matrix(coords, {1.0, 1.5, 1.0}), DomainError);
}

TEST_CASE("factorization succeeds whenever r < 1 and reproduces the matrix") {
  Rng rng(77);
  for (double r : {0.0, 0.5, 0.9, 0.99}) {
    const auto coords = random_coords(rng, 30, 20.0);
    const Matrix c = exp_cov_matrix(coords, {2.5, r, 5.0});
    const CovFactor f = factorize(c);
    for (int i = 0; i < 30; ++i)
      for (int j = 0; j <= i; ++j) {
        double s = 0.0;
        for (int k = 0; k <= j; ++k) s += f.packed_row(i)[k] * f.packed_row(j)[k];
        CHECK(s == doctest::Approx(c(i, j)).epsilon(1e-10));
      }
  }
}

TEST_CASE("quad_form matches a dense inverse oracle") {
  Rng rng(13);
  const auto coords = random_coords(rng, 5, 10.0);
  const Matrix c = exp_cov_matrix(coords, {3.0, 0.7, 4.0});
  const CovFactor f = factorize(c);
  const Matrix cinv = testsupport::invert(c);
  std::vector<double> v(5);
  for (double& x : v) x = rng.normal();
  double expect = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) expect += v[i] * cinv(i, j) * v[j];
  CHECK(quad_form(f, v) == doctest::Approx(expect).epsilon(1e-8));

  // identity covariance, v = (3,4) -> 25
  Matrix eye(2, 2);
  eye(0, 0) = eye(1, 1) = 1.0;
  const CovFactor fi = factorize(eye);
  CHECK(quad_form(fi, std::vector<double>{3.0, 4.0}) == doctest::Approx(25.0));
  CHECK(quad_form(fi, std::vector<double>{0.0, 0.0}) == doctest::Approx(0.0));

  // bilinear form against the same oracle
  std::vector<double> u(5);
  for (double& x : u) x = rng.normal();
  double expect_uv = 0.0;
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) expect_uv += u[i] * cinv(i, j) * v[j];
  CHECK(bilinear_form(f, u, v) == doctest::Approx(expect_uv).epsilon(1e-8));
}

TEST_CASE("sample_mvn: degenerate limit, reproducibility, Monte Carlo covariance") {
  Rng rng(55);
  const std::vector<Vec2> coords = {{0, 0}, {1.5, 0}, {0, 2.5}};
  {
    // near-zero covariance collapses on the mean
    const Matrix c = exp_cov_matrix(coords, {1e-12, 0.0, 1.0});
    const CovFactor f = factorize(c);
    const std::vector<double> mean = {5.0, -2.0, 7.0};
    Rng r1(3);
    const auto x = sample_mvn(mean, f, r1);
    for (int i = 0; i < 3; ++i) CHECK(x[i] == doctest::Approx(mean[i]).epsilon(1e-4));
  }
  {
    const Matrix c = exp_cov_matrix(coords, {2.0, 0.8, 2.0});
    const CovFactor f = factorize(c);
    const std::vector<double> mean = {0, 0, 0};
    Rng r1(42), r2(42);
    const auto a = sample_mvn(mean, f, r1);
    const auto b = sample_mvn(mean, f, r2);
    for (int i = 0; i < 3; ++i) CHECK(a[i] == b[i]);

    // sample covariance of many draws within 2%
    const int n = 100000;
    double s[3][3] = {};
    Rng r3(7);
    for (int k = 0; k < n; ++k) {
      const auto x = sample_mvn(mean, f, r3);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) s[i][j] += x[i] * x[j];
    }
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j)
        CHECK(s[i][j] / n == doctest::Approx(c(i, j)).epsilon(0.02));
  }
}

TEST_CASE("empirical variogram basics") {
  // constant residuals -> all zero
  Rng rng(1);
  const auto coords = random_coords(rng, 40, 25.0);
  std::vector<double> constant(40, 3.5);
  const auto vg0 = empirical_variogram(coords, constant, 10, 20.0);
  for (std::size_t b = 0; b < vg0.bin_centers.size(); ++b)
    if (vg0.counts[b] > 0) CHECK(vg0.semivariances[b] == 0.0);

  // two points, values 0 and 2 -> semivariance 2 in its bin
  const std::vector<Vec2> two = {{0, 0}, {3, 0}};
  const std::vector<double> vals = {0.0, 2.0};
  const auto vg2 = empirical_variogram(two, vals, 1, 5.0);
  CHECK(vg2.counts[0] == 1);
  CHECK(vg2.semivariances[0] == doctest::Approx(2.0));

  // iid N(0,1) residuals: semivariance ~ 1 at all lags
  Rng rng2(88);
  const auto big = random_coords(rng2, 1200, 50.0);
  std::vector<double> iid(big.size());
  for (double& v : iid) v = rng2.normal();
  const auto vg = empirical_variogram(big, iid, 8, 30.0);
  for (std::size_t b = 0; b < vg.bin_centers.size(); ++b) {
    REQUIRE(vg.counts[b] > 100);
    CHECK(vg.semivariances[b] == doctest::Approx(1.0).epsilon(0.05));
  }
}

TEST_CASE("variogram fit: self consistency and pure nugget") {
  // exact model values are recovered to high accuracy
  const ExpCovParams truth{1.0, 0.5, 10.0};
  VariogramEstimate vg;
  for (int b = 0; b < 15; ++b) {
    const double d = 1.0 + 2.0 * b;
    vg.bin_centers.push_back(d);
    vg.semivariances.push_back(exp_variogram_value(truth, d));
    vg.counts.push_back(100);
  }
  const ExpCovParams fit = fit_exp_variogram(vg);
  CHECK(fit.sigma2 == doctest::Approx(1.0).epsilon(1e-4));
  CHECK(fit.r == doctest::Approx(0.5).epsilon(1e-4));
  CHECK(fit.rho == doctest::Approx(10.0).epsilon(1e-4));

  // simulated iid field fits to a tiny spatial proportion
  Rng rng(4);
  std::vector<Vec2> coords(1500);
  for (auto& p : coords) p = {60.0 * rng.uniform(), 60.0 * rng.uniform()};
  std::vector<double> iid(coords.size());
  for (double& v : iid) v = 2.0 * rng.normal();
  const auto emp = empirical_variogram(coords, iid, 15, 40.0);
  const ExpCovParams nug = fit_exp_variogram(emp);
  CHECK(nug.r < 0.05);

  VariogramEstimate tiny;
  tiny.bin_centers = {1.0, 2.0};
  tiny.semivariances = {0.5, 0.8};
  tiny.counts = {5, 5};
  CHECK_THROWS_AS(fit_exp_variogram(tiny), DomainError);
}

namespace {

// Paired sampling design: uniform base points plus one satellite each, so
// both the nugget (short lags) and the sill (long lags) are resolved.
std::vector<Vec2> paired_design(Rng& rng, int n_base, double domain, double rad_lo,
                                double rad_hi) {
  std::vector<Vec2> coords;
  coords.reserve(2 * n_base);
  for (int i = 0; i < n_base; ++i) {
    const Vec2 base{domain * rng.uniform(), domain * rng.uniform()};
    coords.push_back(base);
    const double ang = 6.283185307179586 * rng.uniform();
    const double rad = rad_lo + (rad_hi - rad_lo) * rng.uniform();
    coords.push_back({base.x + rad * std::cos(ang), base.y + rad * std::sin(ang)});
  }
  return coords;
}

ExpCovParams fit_field(std::uint64_t seed, int n_base, double domain,
                       const ExpCovParams& truth) {
  Rng rng(seed);
  const auto coords = paired_design(rng, n_base, domain, 0.3, 2.0 * truth.rho - 0.3);
  const CovFactor f = factorize(exp_cov_matrix(coords, truth));
  std::vector<double> zero(coords.size(), 0.0);
  Rng draw = rng.child("field");
  const auto field = sample_mvn(zero, f, draw);
  const auto vg = empirical_variogram(coords, field, 12, 6.0 * truth.rho);
  return fit_exp_variogram(vg);
}

}  // namespace

TEST_CASE("variogram recovery on a simulated exponential field") {
  // 2000-point field; fitted parameters within 20%.
  const ExpCovParams truth{2.0, 0.7, 8.0};
  const ExpCovParams fit = fit_field(4, 1000, 800.0, truth);
  CHECK(fit.sigma2 == doctest::Approx(truth.sigma2).epsilon(0.2));
  CHECK(fit.r == doctest::Approx(truth.r).epsilon(0.2));
  CHECK(fit.rho == doctest::Approx(truth.rho).epsilon(0.2));
}

TEST_CASE("variogram fit is unbiased across field realizations") {
  // Smaller fields, several seeds: the average estimate lands on the truth
  // even though single-field range estimates carry ~15% sampling noise.
  const ExpCovParams truth{2.0, 0.7, 8.0};
  double s2 = 0, r = 0, rho = 0;
  const int reps = 16;
  for (int seed = 1; seed <= reps; ++seed) {
    const ExpCovParams fit = fit_field(100 + seed, 500, 550.0, truth);
    s2 += fit.sigma2;
    r += fit.r;
    rho += fit.rho;
  }
  CHECK(s2 / reps == doctest::Approx(truth.sigma2).epsilon(0.08));
  CHECK(r / reps == doctest::Approx(truth.r).epsilon(0.08));
  CHECK(rho / reps == doctest::Approx(truth.rho).epsilon(0.12));
}
