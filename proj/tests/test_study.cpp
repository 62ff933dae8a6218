#include <doctest.h>

#include <cmath>
#include <sstream>

#include "latticeme/chain.hpp"
#include "latticeme/config.hpp"
#include "latticeme/study.hpp"

using namespace latticeme;

TEST_CASE("hpd interval follows the shortest-window rule") {
  // 1..100 at level 0.95: gap ceil(95) = 95, all windows tie, smallest lower
  // endpoint wins: (1, 96).
  std::vector<double> v(100);
  for (int i = 0; i < 100; ++i) v[i] = i + 1.0;
  const auto [lo, hi] = hpd_interval(v, 0.95);
  CHECK(lo == 1.0);
  CHECK(hi == 96.0);

  // level 0.5 on uniform samples: tie broken by the smallest lo again
  const auto [lo2, hi2] = hpd_interval(v, 0.5);
  CHECK(lo2 == 1.0);
  CHECK(hi2 == 51.0);

  // width is non-increasing as the level decreases
  double last_width = 1e300;
  for (double level : {0.99, 0.9, 0.7, 0.5, 0.3}) {
    const auto [a, b] = hpd_interval(v, level);
    CHECK(b - a <= last_width);
    last_width = b - a;
  }

  CHECK_THROWS_AS(hpd_interval(std::vector<double>(50, 1.0), 0.95), DomainError);
  CHECK_THROWS_AS(hpd_interval(v, 1.5), DomainError);
}

TEST_CASE("hpd interval is near-symmetric for symmetric unimodal samples") {
  Rng rng(6);
  std::vector<double> v(20000);
  for (double& x : v) x = rng.normal();
  const auto [lo, hi] = hpd_interval(v, 0.95);
  CHECK(lo == doctest::Approx(-1.96).epsilon(0.05));
  CHECK(hi == doctest::Approx(1.96).epsilon(0.05));
}

TEST_CASE("binomial coverage standard error reproduces the reported scale") {
  // n = 100, p = 0.95: 100 * sqrt(p(1-p)/n) = 2.179...
  const double se = 100.0 * std::sqrt(0.95 * 0.05 / 100.0);
  CHECK(se == doctest::Approx(2.2).epsilon(0.01));
}

namespace {

StudyConfig tiny_study() {
  StudyConfig cfg;
  Scenario sc;
  sc.name = "tiny";
  sc.sim.n_b_per_side = 4;
  sc.sim.spacing = 36.0;
  sc.sim.h_a = 5;
  sc.sim.h_b = 4;
  cfg.scenarios = {sc};
  cfg.n_replicates = 2;
  cfg.schedule = {150, 120, 1, 20250809};
  cfg.models = {"hier", "simple", "spatial"};
  cfg.jobs = 1;
  return cfg;
}

}  // namespace

TEST_CASE("a tiny study runs all models and aggregates") {
  const StudyConfig cfg = tiny_study();
  const StudyResult res = run_study(cfg);
  CHECK(res.failures.empty());

  // alpha1 rows exist for every model, with n_effective = 2
  int rows = 0;
  for (const auto& s : res.summary) {
    if (s.param != "alpha1") continue;
    ++rows;
    CHECK(s.n_effective == 2);
    CHECK(s.coverage_pct >= 0.0);
    CHECK(s.coverage_pct <= 100.0);
    CHECK(s.mse100 >= 0.0);
  }
  CHECK(rows == 3);

  // replicate records follow a fixed order and coverage flags agree with
  // the recorded intervals
  for (const auto& r : res.replicates) {
    CHECK(r.covered == (r.hpd_lo <= r.truth && r.truth <= r.hpd_hi));
    CHECK(std::isfinite(r.post_mean));
  }
}

TEST_CASE("study results do not depend on the worker count") {
  StudyConfig cfg = tiny_study();
  cfg.jobs = 1;
  const StudyResult a = run_study(cfg);
  cfg.jobs = 3;
  const StudyResult b = run_study(cfg);
  REQUIRE(a.replicates.size() == b.replicates.size());
  for (std::size_t i = 0; i < a.replicates.size(); ++i) {
    CHECK(a.replicates[i].post_mean == b.replicates[i].post_mean);
    CHECK(a.replicates[i].hpd_lo == b.replicates[i].hpd_lo);
    CHECK(a.replicates[i].param == b.replicates[i].param);
  }
}

TEST_CASE("study config parsing with scenarios and unknown-key rejection") {
  const std::string text = R"(
# study configuration
[simulate]
n_b_per_side = 4
spacing = 36
h_a = 5
h_b = 4

[schedule]
iters = 100
burn_in = 50
seed = 9

[study]
replicates = 3
models = hier, simple

[scenario.loud]
sigma = 220

[scenario.base]
)";
  const ConfigMap cm = ConfigMap::parse_string(text);
  const StudyConfig cfg = parse_study_config(cm);
  CHECK(cfg.n_replicates == 3);
  CHECK(cfg.models.size() == 2);
  REQUIRE(cfg.scenarios.size() == 2);
  CHECK(cfg.scenarios[0].name == "base");
  CHECK(cfg.scenarios[1].name == "loud");
  CHECK(cfg.scenarios[1].sim.sigma == 220.0);
  CHECK(cfg.scenarios[0].sim.sigma == 140.0);
  CHECK(cfg.scenarios[0].sim.n_b_per_side == 4);

  CHECK_THROWS_AS(
      parse_study_config(ConfigMap::parse_string("[simulate]\nnope = 1\n")),
      ParseError);
  CHECK_THROWS_AS(
      parse_sim_config(ConfigMap::parse_string("[simulate]\nr_pix = 1.5\n")),
      ParseError);
}

TEST_CASE("config file format errors carry line numbers") {
  try {
    ConfigMap::parse_string("[simulate]\nspacing 40\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
  try {
    parse_sim_config(ConfigMap::parse_string("[simulate]\nspacing = forty\n"));
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }
}
