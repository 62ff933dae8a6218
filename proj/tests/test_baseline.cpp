#include <doctest.h>

#include <cmath>

#include "latticeme/baseline.hpp"
#include "latticeme/covariance.hpp"
#include "latticeme/simulate.hpp"
#include "support/toy.hpp"

using namespace latticeme;

namespace {

// Fits faked directly from dataset truth: "detected" quantities without
// measurement error.
void fits_from_truth(const SyntheticDataset& ds, std::vector<GaussianPeakFit>& a,
                     std::vector<GaussianPeakFit>& b) {
  const auto& g = ds.geometry;
  a.assign(g.n_a(), {});
  b.assign(g.n_b(), {});
  for (int j = 0; j < g.n_b(); ++j) {
    b[j].center = ds.b_site(j).location;
    b[j].amplitude = ds.b_site(j).intensity;
    b[j].converged = true;
  }
  for (int j = 0; j < g.n_a(); ++j) {
    a[j].center = ds.a_site(j).location;
    a[j].amplitude = ds.a_site(j).intensity;
    a[j].converged = true;
  }
}

SyntheticDataset small_dataset(std::uint64_t seed, double alpha1 = -0.15) {
  SimConfig cfg;
  cfg.n_b_per_side = 6;
  cfg.spacing = 40.0;
  cfg.alpha1 = alpha1;
  return simulate_dataset(cfg, Rng(seed));
}

}  // namespace

TEST_CASE("baseline data from truth-fed fits matches direct computation") {
  const SyntheticDataset ds = small_dataset(3);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  CHECK(bd.n_excluded == 0);
  REQUIRE(static_cast<int>(bd.delta_x.size()) == ds.geometry.n_a());

  std::vector<Vec2> b_loc(ds.geometry.n_b());
  std::vector<double> b_beta(ds.geometry.n_b());
  std::vector<Vec2> a_loc(ds.geometry.n_a());
  for (int j = 0; j < ds.geometry.n_b(); ++j) {
    b_loc[j] = ds.b_site(j).location;
    b_beta[j] = ds.b_site(j).intensity;
  }
  for (int j = 0; j < ds.geometry.n_a(); ++j) a_loc[j] = ds.a_site(j).location;
  const ProcessVectors pv = process_vectors(ds.geometry, b_loc, b_beta, a_loc);
  for (int j = 0; j < ds.geometry.n_a(); ++j) {
    CHECK(bd.delta_x[j] == doctest::Approx(pv.delta_x[j]).epsilon(1e-10));
    CHECK(bd.psi_y[j] == doctest::Approx(pv.psi_y[j]).epsilon(1e-10));
  }
}

TEST_CASE("equal fitted intensities give a zero covariate") {
  const SyntheticDataset ds = small_dataset(4);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  for (auto& f : b) f.amplitude = 1000.0;
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  for (double v : bd.psi_x) CHECK(std::abs(v) < 1e-12);
  for (double v : bd.psi_y) CHECK(std::abs(v) < 1e-12);
}

TEST_CASE("unconverged fits: excluded when tolerant, error when strict") {
  const SyntheticDataset ds = small_dataset(5);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  a[2].converged = false;
  const BaselineData bd = build_baseline_data(ds.geometry, a, b, false);
  CHECK(bd.n_excluded == 1);
  CHECK(static_cast<int>(bd.delta_x.size()) == ds.geometry.n_a() - 1);
  CHECK_THROWS_AS(build_baseline_data(ds.geometry, a, b, true), FitError);

  // an unconverged B fit drops its neighboring A rows
  fits_from_truth(ds, a, b);
  b[7].converged = false;
  const BaselineData bd2 = build_baseline_data(ds.geometry, a, b, false);
  int touching = 0;
  for (int j = 0; j < ds.geometry.n_a(); ++j)
    for (int k : ds.geometry.a_neighbors[j])
      if (k == 7) {
        ++touching;
        break;
      }
  CHECK(bd2.n_excluded == touching);
}

TEST_CASE("noise-free covariates center the slope posterior on the truth") {
  const SyntheticDataset ds = small_dataset(6);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  const McmcSchedule sched{2000, 500, 1, 77};
  const BaselinePriors bp;
  const ChainSet simple = run_baseline(bd, BaselineModel::simple, bp, sched);
  const ParamSummary s = summarize_chain(*simple.find("alpha1"));
  // Unattenuated: posterior concentrates near -0.15 (GP residuals make the
  // effective noise slightly larger than sigma_a alone)
  CHECK(s.mean == doctest::Approx(-0.15).epsilon(0.4));
  CHECK(s.hpd_lo < -0.15);
  CHECK(s.hpd_hi > -0.15 * 1.6);
}

TEST_CASE("zero covariate leaves the slope at its prior") {
  const SyntheticDataset ds = small_dataset(7);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  for (auto& f : b) f.amplitude = 500.0;  // psi == 0
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  const McmcSchedule sched{3000, 200, 1, 78};
  const BaselinePriors bp;
  const ChainSet simple = run_baseline(bd, BaselineModel::simple, bp, sched);
  const ParamSummary s = summarize_chain(*simple.find("alpha1"));
  CHECK(s.sd == doctest::Approx(1000.0).epsilon(0.1));
}

TEST_CASE("spatial run with frozen r = 0 reproduces the simple run's alpha draws") {
  const SyntheticDataset ds = small_dataset(8);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  const McmcSchedule sched{500, 100, 1, 91};
  BaselinePriors bp;
  const ChainSet simple = run_baseline(bd, BaselineModel::simple, bp, sched);
  bp.update_corr = false;
  bp.init_r = 0.0;
  const ChainSet spatial = run_baseline(bd, BaselineModel::spatial, bp, sched);
  const Chain* a0s = simple.find("alpha0");
  const Chain* a0p = spatial.find("alpha0");
  const Chain* a1s = simple.find("alpha1");
  const Chain* a1p = spatial.find("alpha1");
  REQUIRE(a0s);
  REQUIRE(a0p);
  for (std::size_t i = 0; i < a0s->draws.size(); ++i) {
    CHECK(a0s->draws[i] == a0p->draws[i]);
    CHECK(a1s->draws[i] == a1p->draws[i]);
  }
}

TEST_CASE("spatial correlation draws respect their supports") {
  const SyntheticDataset ds = small_dataset(9);
  std::vector<GaussianPeakFit> a, b;
  fits_from_truth(ds, a, b);
  const BaselineData bd = build_baseline_data(ds.geometry, a, b);
  const McmcSchedule sched{800, 400, 1, 13};
  const BaselinePriors bp;
  const ChainSet spatial = run_baseline(bd, BaselineModel::spatial, bp, sched);
  for (double v : spatial.find("r")->draws) {
    CHECK(v >= 0.0);
    CHECK(v <= 1.0);
  }
  for (double v : spatial.find("rho")->draws) CHECK(v > 0.0);
}
