#include <doctest.h>

#include <cmath>
#include <vector>

#include "latticeme/linalg.hpp"
#include "latticeme/rng.hpp"
#include "support/dense_oracle.hpp"

using namespace latticeme;

namespace {

Matrix random_spd(Rng& rng, std::size_t n) {
  // A = B B^T + n I keeps the spectrum comfortably positive.
  Matrix b(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) b(i, j) = rng.normal();
  Matrix a(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) {
      double s = 0.0;
      for (std::size_t k = 0; k < n; ++k) s += b(i, k) * b(j, k);
      a(i, j) = s + (i == j ? static_cast<double>(n) : 0.0);
    }
  return a;
}

}  // namespace

TEST_CASE("Cholesky of identity and scaled identity") {
  Matrix eye(4, 4);
  for (int i = 0; i < 4; ++i) eye(i, i) = 1.0;
  auto f = Cholesky::compute(eye);
  CHECK(f.log_det() == doctest::Approx(0.0));
  for (int i = 0; i < 4; ++i) CHECK(f.diag(i) == doctest::Approx(1.0));

  Matrix s(3, 3);
  for (int i = 0; i < 3; ++i) s(i, i) = 4.0;
  auto g = Cholesky::compute(s);
  for (int i = 0; i < 3; ++i) CHECK(g.diag(i) == doctest::Approx(2.0));
  CHECK(g.log_det() == doctest::Approx(3.0 * std::log(4.0)));
}

TEST_CASE("factor reproduces the matrix and solves match a dense inverse") {
  Rng rng(42);
  for (std::size_t n : {1u, 2u, 5u, 17u, 50u}) {
    Matrix a = random_spd(rng, n);
    auto f = Cholesky::compute(a);

    // L L^T == A
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j <= i; ++j) {
        double s = 0.0;
        for (std::size_t k = 0; k <= j; ++k) s += f.packed_row(i)[k] * f.packed_row(j)[k];
        CHECK(s == doctest::Approx(a(i, j)).epsilon(1e-10));
      }

    // Solve against Gauss-Jordan inverse.
    Matrix ainv = testsupport::invert(a);
    std::vector<double> v(n);
    for (double& x : v) x = rng.normal();
    std::vector<double> expect(n, 0.0);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) expect[i] += ainv(i, j) * v[j];
    std::vector<double> got = v;
    f.solve(got.data());
    double quad_expect = 0.0;
    for (std::size_t i = 0; i < n; ++i) quad_expect += v[i] * expect[i];
    for (std::size_t i = 0; i < n; ++i)
      CHECK(got[i] == doctest::Approx(expect[i]).epsilon(1e-8));

    std::vector<double> work(n);
    CHECK(f.quad_inv(v.data(), work.data()) ==
          doctest::Approx(quad_expect).epsilon(1e-8));

    // log det against the oracle.
    CHECK(f.log_det() == doctest::Approx(testsupport::log_det(a)).epsilon(1e-9));
  }
}

TEST_CASE("rescale is equivalent to factoring the scaled matrix") {
  Rng rng(11);
  Matrix a = random_spd(rng, 8);
  auto f = Cholesky::compute(a);
  f.rescale(2.5);
  Matrix b(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) b(i, j) = 2.5 * a(i, j);
  auto g = Cholesky::compute(b);
  CHECK(f.log_det() == doctest::Approx(g.log_det()).epsilon(1e-12));
  std::vector<double> v(8, 1.0), w1(8), w2(8);
  CHECK(f.quad_inv(v.data(), w1.data()) ==
        doctest::Approx(g.quad_inv(v.data(), w2.data())).epsilon(1e-12));
}

TEST_CASE("non positive definite matrix reports the failing pivot") {
  Matrix a(3, 3);
  a(0, 0) = 1.0;
  a(1, 1) = -2.0;
  a(2, 2) = 1.0;
  try {
    Cholesky::compute(a);
    FAIL("expected FactorizationError");
  } catch (const FactorizationError& e) {
    CHECK(e.pivot == 1);
  }
}
