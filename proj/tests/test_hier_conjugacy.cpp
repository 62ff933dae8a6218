#include <doctest.h>

#include <cmath>

#include "latticeme/hier.hpp"
#include "support/naive_model.hpp"
#include "support/quadrature.hpp"
#include "support/toy.hpp"

// Every Gibbs full conditional is checked against 1-D quadrature of the
// unnormalized conditional computed by the from-scratch joint evaluator.
// The instance is 5 sites x 25 pixels; relative tolerance 1e-6 on mean and
// variance.

using namespace latticeme;
using testsupport::NaiveModel;
using testsupport::quad_moments;

namespace {

struct Fixture {
  testsupport::Toy toy = testsupport::make_toy(424242);
  HierPriors priors = testsupport::toy_priors();
  HierSampler sampler{toy.data, priors, toy.truth_state, 1};
  NaiveModel naive{toy.data, priors};

  // Probe at a mildly perturbed state so nothing sits exactly at a mode.
  Fixture() {
    HierState st = toy.truth_state;
    st.beta0 *= 1.03;
    st.alpha0 += 0.02;
    st.sigma2 *= 1.1;
    sampler.set_state(st);
  }
  const HierState& st() const { return sampler.state(); }
};

void check_normal(const NormalParams& got, const testsupport::QuadMoments& want) {
  CHECK(std::abs(got.mean - want.mean) <=
        1e-6 * (std::abs(want.mean) + std::sqrt(want.var)));
  CHECK(std::abs(got.var - want.var) <= 1e-6 * want.var);
}

void check_invgamma(const InvGammaParams& got, const testsupport::QuadMoments& want) {
  const double mean = got.rate / (got.shape - 1.0);
  const double var = mean * mean / (got.shape - 2.0);
  CHECK(std::abs(mean - want.mean) <= 1e-6 * std::abs(want.mean));
  CHECK(std::abs(var - want.var) <= 2e-6 * want.var);
}

}  // namespace

TEST_CASE("beta0 full conditional matches quadrature") {
  Fixture f;
  const NormalParams p = f.sampler.beta0_conditional();
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.beta0 = v;
    return f.naive.joint(probe);
  };
  check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
}

TEST_CASE("beta_A full conditional matches quadrature") {
  Fixture f;
  const NormalParams p = f.sampler.beta_a_conditional(0);
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.beta_a[0] = v;
    return f.naive.joint(probe);
  };
  check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
}

TEST_CASE("beta_B data-layer proposal matches quadrature without the process term") {
  Fixture f;
  const NormalParams p = f.sampler.beta_b_proposal(2);
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.beta_b[2] = v;
    // data layer + conjugate prior only (the proposal's target)
    return f.naive.loglik_data(probe) +
           NaiveModel::norm_lp(v, probe.mu_beta_b, probe.var_beta_b);
  };
  check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
}

TEST_CASE("sigma2 full conditional matches quadrature") {
  Fixture f;
  const InvGammaParams p = f.sampler.sigma2_conditional();
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.sigma2 = v;
    return f.naive.joint(probe);
  };
  check_invgamma(p, quad_moments(logf, p.rate / (p.shape - 1.0), 1.0, true));
}

TEST_CASE("alpha0 and alpha1 full conditionals match quadrature") {
  Fixture f;
  {
    const NormalParams p = f.sampler.alpha0_conditional();
    HierState probe = f.st();
    auto logf = [&](double v) {
      probe.alpha0 = v;
      return f.naive.joint(probe);
    };
    check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
  }
  {
    const NormalParams p = f.sampler.alpha1_conditional();
    HierState probe = f.st();
    auto logf = [&](double v) {
      probe.alpha1 = v;
      return f.naive.joint(probe);
    };
    check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
  }
}

TEST_CASE("sigma2_A full conditional matches quadrature") {
  Fixture f;
  const InvGammaParams p = f.sampler.sigma2_a_conditional();
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.sigma2_a = v;
    return f.naive.joint(probe);
  };
  check_invgamma(p, quad_moments(logf, p.rate / (p.shape - 1.0), 1.5, true));
}

TEST_CASE("mu_beta and sigma2_beta full conditionals match quadrature") {
  Fixture f;
  for (SiteType t : {SiteType::A, SiteType::B}) {
    {
      const NormalParams p = f.sampler.mu_beta_conditional(t);
      HierState probe = f.st();
      auto logf = [&](double v) {
        (t == SiteType::A ? probe.mu_beta_a : probe.mu_beta_b) = v;
        return f.naive.joint(probe);
      };
      check_normal(p, quad_moments(logf, p.mean, 10.0 * std::sqrt(p.var), false));
    }
    {
      const InvGammaParams p = f.sampler.sigma2_beta_conditional(t);
      HierState probe = f.st();
      auto logf = [&](double v) {
        (t == SiteType::A ? probe.var_beta_a : probe.var_beta_b) = v;
        return f.naive.joint(probe);
      };
      check_invgamma(p, quad_moments(logf, p.rate / (p.shape - 1.0), 1.5, true));
    }
  }
}

TEST_CASE("sigma2_B full conditional matches quadrature") {
  Fixture f;
  const InvGammaParams p = f.sampler.sigma2_b_conditional();
  HierState probe = f.st();
  auto logf = [&](double v) {
    probe.sigma2_b = v;
    return f.naive.joint(probe);
  };
  check_invgamma(p, quad_moments(logf, p.rate / (p.shape - 1.0), 2.0, true));
}

TEST_CASE("conjugate-limit sanity: flat prior beta0 equals the gls mean") {
  // One window dominates: with r_pix = 0, beta = 0 everywhere and a huge
  // prior variance, the posterior mean of beta0 is the grand pixel average.
  auto cfg = testsupport::toy_sim_config();
  auto toy = testsupport::make_toy(31, cfg);
  HierState st = toy.truth_state;
  st.r_pix = 0.0;
  // Vanishing but equal intensities: the data term drops out while the
  // weighted centers stay defined.
  for (double& b : st.beta_a) b = 1e-30;
  for (double& b : st.beta_b) b = 1e-30;
  HierPriors pr = testsupport::toy_priors();
  pr.beta0_var = 1e18;
  HierSampler sampler(toy.data, pr, st, 1);
  const NormalParams p = sampler.beta0_conditional();
  double sum = 0.0;
  long count = 0;
  for (const auto& w : toy.data.a_windows)
    for (double v : w.y) {
      sum += v;
      ++count;
    }
  for (const auto& w : toy.data.b_windows)
    for (double v : w.y) {
      sum += v;
      ++count;
    }
  CHECK(p.mean == doctest::Approx(sum / count).epsilon(1e-9));
  CHECK(p.var == doctest::Approx(st.sigma2 / count).epsilon(1e-9));
}

TEST_CASE("iid-limit sigma2 conditional is the textbook conjugacy") {
  auto toy = testsupport::make_toy(77);
  HierState st = toy.truth_state;
  st.r_pix = 0.0;
  HierSampler sampler(toy.data, testsupport::toy_priors(), st, 1);
  const InvGammaParams p = sampler.sigma2_conditional();
  double rss = 0.0;
  long n = 0;
  auto add = [&](const Window& w, Vec2 s, double beta, double psi) {
    for (std::size_t k = 0; k < w.size(); ++k) {
      const double dx = w.px[k] - s.x;
      const double dy = w.py[k] - s.y;
      const double m =
          st.beta0 + beta * std::exp(-(dx * dx + dy * dy) / (2.0 * psi * psi));
      rss += (w.y[k] - m) * (w.y[k] - m);
      ++n;
    }
  };
  for (int j = 0; j < toy.data.n_a(); ++j)
    add(toy.data.a_windows[j], st.s_a[j], st.beta_a[j], st.psi_a);
  for (int j = 0; j < toy.data.n_b(); ++j)
    add(toy.data.b_windows[j], st.s_b[j], st.beta_b[j], st.psi_b);
  CHECK(p.shape == doctest::Approx(0.01 + 0.5 * n).epsilon(1e-12));
  CHECK(p.rate == doctest::Approx(0.01 + 0.5 * rss).epsilon(1e-9));
}
