#include "latticeme/study.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <mutex>
#include <ostream>
#include <thread>

#include "latticeme/baseline.hpp"
#include "latticeme/errors.hpp"
#include "latticeme/pipeline.hpp"

namespace latticeme {

void StudyConfig::validate() const {
  if (scenarios.empty()) throw DomainError("study config: no scenarios");
  if (n_replicates < 2) throw DomainError("study config: need at least 2 replicates");
  if (models.empty()) throw DomainError("study config: no models selected");
  for (const auto& m : models)
    if (m != "hier" && m != "simple" && m != "spatial")
      throw DomainError("study config: unknown model '" + m + "'");
  for (const auto& sc : scenarios) sc.sim.validate();
}

std::vector<TrackedParam> tracked_params(const Scenario& sc, const std::string& model) {
  const SimConfig& c = sc.sim;
  std::vector<TrackedParam> base = {
      {"alpha0", "alpha0", false, c.alpha0},
      {"alpha1", "alpha1", false, c.alpha1},
      {"sigma_a", "sigma2_a", true, c.sigma_a},
  };
  if (model == "hier") {
    base.push_back({"r", "r", false, c.r});
    base.push_back({"rho", "rho", false, c.rho});
    base.push_back({"beta0", "beta0", false, c.beta0});
    base.push_back({"sigma", "sigma2", true, c.sigma});
    base.push_back({"psi_a", "psi_a", false, c.psi_a});
    base.push_back({"psi_b", "psi_b", false, c.psi_b});
    base.push_back({"r_pix", "r_pix", false, c.r_pix});
    base.push_back({"rho_pix", "rho_pix", false, c.rho_pix});
    base.push_back({"sigma_b", "sigma2_b", true, c.sigma_b});
    if (sc.ssvs) base.push_back({"eta", "eta", false, 1.0});
  } else if (model == "spatial") {
    base.push_back({"r", "r", false, c.r});
    base.push_back({"rho", "rho", false, c.rho});
  }
  return base;
}

namespace {

struct TaskResult {
  std::vector<ReplicateRecord> records;
  std::vector<ReplicateFailure> failures;
};

std::vector<SiteSpec> specs_from_truth(const SyntheticDataset& ds) {
  const auto& g = ds.geometry;
  std::vector<SiteSpec> specs;
  specs.reserve(ds.truth.size());
  const int n = g.n_b_per_side;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int j = LatticeGeometry::b_index(n, ix, iy);
      specs.push_back({j, SiteType::B, {ix, iy}, ds.b_site(j).location});
    }
  for (int iy = 0; iy < n - 1; ++iy)
    for (int ix = 0; ix < n - 1; ++ix) {
      const int j = iy * (n - 1) + ix;
      specs.push_back({g.n_b() + j, SiteType::A, {ix, iy}, ds.a_site(j).location});
    }
  return specs;
}

void record_model(TaskResult& out, const Scenario& sc, int rep,
                  const std::string& model, const ChainSet& chains) {
  for (const TrackedParam& tp : tracked_params(sc, model)) {
    const Chain* c = chains.find(tp.chain);
    if (!c) continue;
    Chain view = *c;
    if (tp.sqrt_scale)
      for (double& v : view.draws) v = std::sqrt(v);
    const ParamSummary s = summarize_chain(view);
    ReplicateRecord r;
    r.scenario = sc.name;
    r.replicate = rep;
    r.model = model;
    r.param = tp.name;
    r.truth = tp.truth;
    r.post_mean = s.mean;
    r.post_sd = s.sd;
    r.hpd_lo = s.hpd_lo;
    r.hpd_hi = s.hpd_hi;
    r.covered = s.hpd_lo <= tp.truth && tp.truth <= s.hpd_hi;
    out.records.push_back(std::move(r));
  }
}

TaskResult run_replicate(const StudyConfig& cfg, const Scenario& sc, int si, int rep) {
  TaskResult out;
  const Rng root(cfg.schedule.seed);
  const Rng rep_rng =
      root.child("scenario").child(static_cast<std::uint64_t>(si)).child("replicate").child(
          static_cast<std::uint64_t>(rep));

  SyntheticDataset ds;
  FitInputs fit;
  try {
    ds = simulate_dataset(sc.sim, rep_rng.child("sim"));
    HierPriors priors;
    priors.sigma2_beta_prior_varscale = sc.sigma2_beta_prior_varscale;
    priors.ssvs = sc.ssvs;
    const std::vector<SiteSpec> specs = specs_from_truth(ds);
    fit = prepare_fit(ds.image, specs, sc.sim.h_a, sc.sim.h_b, sc.sim.n_b_per_side,
                      priors);
  } catch (const std::exception& e) {
    for (const auto& m : cfg.models)
      out.failures.push_back({sc.name, rep, m, e.what()});
    return out;
  }

  for (const auto& model : cfg.models) {
    McmcSchedule sched = cfg.schedule;
    sched.seed = rep_rng.child(model).key();
    try {
      if (model == "hier") {
        const HierFitResult res = run_hier_mcmc(fit.data, fit.priors, fit.init, sched);
        record_model(out, sc, rep, model, res.chains);
      } else {
        const BaselinePriors bp;
        const ChainSet chains = run_baseline(
            fit.baseline,
            model == "simple" ? BaselineModel::simple : BaselineModel::spatial, bp,
            sched);
        record_model(out, sc, rep, model, chains);
      }
    } catch (const std::exception& e) {
      out.failures.push_back({sc.name, rep, model, e.what()});
    }
  }
  return out;
}

}  // namespace

StudyResult run_study(const StudyConfig& cfg, std::ostream* progress) {
  cfg.validate();
  const int n_scen = static_cast<int>(cfg.scenarios.size());
  const long n_tasks = static_cast<long>(n_scen) * cfg.n_replicates;
  std::vector<TaskResult> slots(n_tasks);

  long jobs = cfg.jobs > 0 ? cfg.jobs
                           : static_cast<long>(std::thread::hardware_concurrency());
  jobs = std::max(1L, std::min(jobs, n_tasks));

  std::atomic<long> next{0};
  std::atomic<long> done{0};
  std::mutex log_mutex;
  auto worker = [&] {
    for (;;) {
      const long t = next.fetch_add(1);
      if (t >= n_tasks) return;
      const int si = static_cast<int>(t / cfg.n_replicates);
      const int rep = static_cast<int>(t % cfg.n_replicates);
      slots[t] = run_replicate(cfg, cfg.scenarios[si], si, rep);
      const long d = done.fetch_add(1) + 1;
      if (progress) {
        std::lock_guard<std::mutex> lock(log_mutex);
        *progress << "replicate " << d << "/" << n_tasks << " ("
                  << cfg.scenarios[si].name << " #" << rep << ")\n";
        progress->flush();
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(jobs);
  for (int i = 0; i < jobs; ++i) pool.emplace_back(worker);
  for (auto& th : pool) th.join();

  StudyResult res;
  for (const TaskResult& tr : slots) {
    res.replicates.insert(res.replicates.end(), tr.records.begin(), tr.records.end());
    res.failures.insert(res.failures.end(), tr.failures.begin(), tr.failures.end());
  }

  // Aggregate per (scenario, model, param), replicate order fixed by the
  // sequential pass above.
  for (const Scenario& sc : cfg.scenarios)
    for (const auto& model : cfg.models)
      for (const TrackedParam& tp : tracked_params(sc, model)) {
        std::vector<double> est, psd, sqerr;
        std::vector<bool> cov;
        for (const ReplicateRecord& r : res.replicates) {
          if (r.scenario != sc.name || r.model != model || r.param != tp.name) continue;
          est.push_back(r.post_mean - r.truth);
          psd.push_back(r.post_sd);
          sqerr.push_back((r.post_mean - r.truth) * (r.post_mean - r.truth));
          cov.push_back(r.covered);
        }
        if (est.empty()) continue;
        const double n = static_cast<double>(est.size());
        SummaryRow row;
        row.scenario = sc.name;
        row.model = model;
        row.param = tp.name;
        row.truth = tp.truth;
        row.n_effective = static_cast<int>(est.size());
        row.bias = mean_of(est);
        row.bias_se = sd_of(est) / std::sqrt(n);
        row.mean_post_sd = mean_of(psd);
        row.mean_post_sd_se = sd_of(psd) / std::sqrt(n);
        double p = 0.0;
        for (bool c : cov) p += c ? 1.0 : 0.0;
        p /= n;
        row.coverage_pct = 100.0 * p;
        row.coverage_se = 100.0 * std::sqrt(p * (1.0 - p) / n);
        row.mse100 = 100.0 * mean_of(sqerr);
        row.mse100_se = 100.0 * sd_of(sqerr) / std::sqrt(n);
        res.summary.push_back(std::move(row));
      }
  return res;
}

}  // namespace latticeme
