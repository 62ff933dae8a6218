#ifndef LATTICEME_STUDY_HPP
#define LATTICEME_STUDY_HPP

#include <iosfwd>
#include <string>
#include <vector>

#include "latticeme/hier.hpp"
#include "latticeme/simulate.hpp"

// Replicated simulation-study driver: simulate, detect, fit the selected
// models, and aggregate bias / mean posterior SD / coverage / MSE with Monte
// Carlo standard errors. Replicates are the unit of parallelism; every
// replicate draws from its own named stream, so results do not depend on the
// worker count.

namespace latticeme {

struct Scenario {
  std::string name;
  SimConfig sim;
  double sigma2_beta_prior_varscale = 625.0;
  bool ssvs = false;
};

struct StudyConfig {
  std::vector<Scenario> scenarios;
  int n_replicates = 30;
  McmcSchedule schedule;                 // seed is the study root seed
  std::vector<std::string> models = {"hier", "simple", "spatial"};
  int jobs = 0;                          // 0 -> hardware concurrency

  void validate() const;
};

struct ReplicateRecord {
  std::string scenario;
  int replicate = 0;
  std::string model;
  std::string param;
  double truth = 0, post_mean = 0, post_sd = 0, hpd_lo = 0, hpd_hi = 0;
  bool covered = false;
};

struct ReplicateFailure {
  std::string scenario;
  int replicate = 0;
  std::string model;
  std::string error;
};

struct SummaryRow {
  std::string scenario, model, param;
  double truth = 0;
  double bias = 0, bias_se = 0;
  double mean_post_sd = 0, mean_post_sd_se = 0;
  double coverage_pct = 0, coverage_se = 0;
  double mse100 = 0, mse100_se = 0;
  int n_effective = 0;
};

struct StudyResult {
  std::vector<ReplicateRecord> replicates;
  std::vector<ReplicateFailure> failures;
  std::vector<SummaryRow> summary;
};

StudyResult run_study(const StudyConfig& cfg, std::ostream* progress = nullptr);

// Chains from one fitted model mapped onto reporting-scale parameters
// (variances reported as SDs) with the scenario's true values.
struct TrackedParam {
  std::string name;       // reporting name, e.g. "sigma_a"
  std::string chain;      // chain name, e.g. "sigma2_a"
  bool sqrt_scale = false;
  double truth = 0;
};
std::vector<TrackedParam> tracked_params(const Scenario& sc, const std::string& model);

}  // namespace latticeme

#endif
