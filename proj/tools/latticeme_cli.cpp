// latticeme: spatial hierarchical measurement-error modeling for atom-column
// images. Subcommands: simulate, detect, fit, study, variogram.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "latticeme/baseline.hpp"
#include "latticeme/config.hpp"
#include "latticeme/csv.hpp"
#include "latticeme/detect.hpp"
#include "latticeme/errors.hpp"
#include "latticeme/hier.hpp"
#include "latticeme/imaging.hpp"
#include "latticeme/kernel.hpp"
#include "latticeme/manifest.hpp"
#include "latticeme/pipeline.hpp"
#include "latticeme/simd.hpp"
#include "latticeme/simulate.hpp"
#include "latticeme/study.hpp"

namespace fs = std::filesystem;
using namespace latticeme;

namespace {

using csv::fmt;

struct Timer {
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  }
};

std::string type_name(SiteType t) { return t == SiteType::A ? "A" : "B"; }

SiteType type_from(const std::string& s) {
  if (s == "A" || s == "a") return SiteType::A;
  if (s == "B" || s == "b") return SiteType::B;
  throw DomainError("site type must be A or B, got '" + s + "'");
}

int jobs_or_env(int jobs_flag) {
  if (jobs_flag > 0) return jobs_flag;
  if (const char* env = std::getenv("LATTICE_ME_JOBS")) {
    const int v = std::atoi(env);
    if (v > 0) return v;
  }
  return 0;  // harness default: hardware concurrency
}

// sites CSV: site_id,type,grid_ix,grid_iy,x,y
std::vector<SiteSpec> load_sites(const std::string& path) {
  const auto rows = csv::read(path);
  if (rows.empty() || rows[0].size() < 6 || rows[0][0] != "site_id")
    throw ParseError("sites csv must start with header site_id,type,grid_ix,grid_iy,x,y", 1);
  std::vector<SiteSpec> specs;
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const auto& r = rows[i];
    if (r.size() < 6) throw ParseError("sites csv: short row", static_cast<int>(i + 1));
    SiteSpec s;
    s.id = std::stoi(r[0]);
    s.type = type_from(r[1]);
    s.grid = {std::stoi(r[2]), std::stoi(r[3])};
    s.approx = {std::stod(r[4]), std::stod(r[5])};
    specs.push_back(s);
  }
  return specs;
}

void write_sites_csv(const std::string& path, const SyntheticDataset& ds) {
  csv::Writer w(path, {"site_id", "type", "grid_ix", "grid_iy", "x", "y"});
  const int n = ds.geometry.n_b_per_side;
  for (int iy = 0; iy < n; ++iy)
    for (int ix = 0; ix < n; ++ix) {
      const int j = LatticeGeometry::b_index(n, ix, iy);
      const auto& s = ds.b_site(j);
      w.row({std::to_string(s.id), "B", std::to_string(ix), std::to_string(iy),
             fmt(s.location.x), fmt(s.location.y)});
    }
  for (int iy = 0; iy < n - 1; ++iy)
    for (int ix = 0; ix < n - 1; ++ix) {
      const int j = iy * (n - 1) + ix;
      const auto& s = ds.a_site(j);
      w.row({std::to_string(s.id), "A", std::to_string(ix), std::to_string(iy),
             fmt(s.location.x), fmt(s.location.y)});
    }
}

void write_truth_csv(const std::string& path, const SyntheticDataset& ds) {
  csv::Writer w(path, {"site_id", "type", "x", "y", "beta"});
  for (const auto& s : ds.truth)
    w.row({std::to_string(s.id), type_name(s.type), fmt(s.location.x),
           fmt(s.location.y), fmt(s.intensity)});
}

void write_geometry_csv(const std::string& dir, const LatticeGeometry& g) {
  {
    csv::Writer w(dir + "/geometry.csv",
                  {"site_id", "type", "grid_x", "grid_y", "mean_x", "mean_y"});
    const int n = g.n_b_per_side;
    for (int iy = 0; iy < n; ++iy)
      for (int ix = 0; ix < n; ++ix) {
        const int j = LatticeGeometry::b_index(n, ix, iy);
        w.row({std::to_string(j), "B", std::to_string(ix), std::to_string(iy),
               fmt(g.b_means[j].x), fmt(g.b_means[j].y)});
      }
    for (int iy = 0; iy < n - 1; ++iy)
      for (int ix = 0; ix < n - 1; ++ix) {
        const int j = iy * (n - 1) + ix;
        w.row({std::to_string(g.n_b() + j), "A", std::to_string(ix),
               std::to_string(iy), fmt(g.a_means[j].x), fmt(g.a_means[j].y)});
      }
  }
  {
    csv::Writer w(dir + "/neighbors.csv", {"a_site_id", "b_site_id"});
    for (int j = 0; j < g.n_a(); ++j)
      for (int k : g.a_neighbors[j])
        w.row({std::to_string(g.n_b() + j), std::to_string(k)});
  }
}

void write_detect_csv(const std::string& path, const DetectOutput& det) {
  csv::Writer w(path, {"site_id", "type", "x0", "y0", "A", "Z", "theta", "sigma1",
                       "sigma2", "rss", "converged"});
  auto dump = [&](const std::vector<GaussianPeakFit>& fits,
                  const std::vector<SiteSpec>& sites, const char* type) {
    for (std::size_t i = 0; i < fits.size(); ++i) {
      const auto& f = fits[i];
      w.row({std::to_string(sites[i].id), type, fmt(f.center.x), fmt(f.center.y),
             fmt(f.amplitude), fmt(f.background), fmt(f.theta), fmt(f.sigma1),
             fmt(f.sigma2), fmt(f.rss), f.converged ? "1" : "0"});
    }
  };
  dump(det.b_fits, det.b_sites, "B");
  dump(det.a_fits, det.a_sites, "A");
}

void write_chains(const std::string& dir, const ChainSet& chains,
                  std::vector<std::string>& outputs) {
  for (const auto& c : chains.chains) {
    const std::string path = dir + "/chain_" + c.name + ".csv";
    csv::Writer w(path, {"iter", c.name});
    for (std::size_t i = 0; i < c.draws.size(); ++i)
      w.row({std::to_string(i), fmt(c.draws[i])});
    outputs.push_back("chain_" + c.name + ".csv");
  }
  {
    csv::Writer w(dir + "/summary.csv", {"param", "mean", "sd", "hpd_lo", "hpd_hi"});
    for (const auto& c : chains.chains) {
      const ParamSummary s = summarize_chain(c);
      w.row({c.name, fmt(s.mean), fmt(s.sd), fmt(s.hpd_lo), fmt(s.hpd_hi)});
    }
    outputs.push_back("summary.csv");
  }
  {
    csv::Writer w(dir + "/acceptance.csv", {"block", "rate"});
    for (const auto& [block, rate] : chains.acceptance) w.row({block, fmt(rate)});
    outputs.push_back("acceptance.csv");
  }
}

int cmd_simulate(const std::string& config_path, std::uint64_t seed_flag,
                 bool seed_set, const std::string& out) {
  Timer timer;
  SimConfig cfg;
  std::string hash = "-";
  if (!config_path.empty()) {
    const ConfigMap cm = ConfigMap::parse_file(config_path);
    cfg = parse_sim_config(cm);
    hash = hash_file_hex(config_path);
  }
  if (seed_set) cfg.seed = seed_flag;
  fs::create_directories(out);
  const SyntheticDataset ds = simulate_dataset(cfg, Rng(cfg.seed));

  save_matrix(ds.image, out + "/image.txt");
  write_sites_csv(out + "/sites.csv", ds);
  write_truth_csv(out + "/truth.csv", ds);
  write_geometry_csv(out, ds.geometry);
  {
    std::ofstream echo(out + "/config_echo.cfg");
    echo << "[simulate]\n"
         << "n_b_per_side = " << cfg.n_b_per_side << "\nspacing = " << fmt(cfg.spacing)
         << "\nsigma_b = " << fmt(cfg.sigma_b) << "\nbeta0 = " << fmt(cfg.beta0)
         << "\nmu_beta_a = " << fmt(cfg.mu_beta_a) << "\nmu_beta_b = " << fmt(cfg.mu_beta_b)
         << "\nsd_beta_a = " << fmt(cfg.sd_beta_a) << "\nsd_beta_b = " << fmt(cfg.sd_beta_b)
         << "\nalpha0 = " << fmt(cfg.alpha0) << "\nalpha1 = " << fmt(cfg.alpha1)
         << "\nsigma_a = " << fmt(cfg.sigma_a) << "\nr = " << fmt(cfg.r)
         << "\nrho = " << fmt(cfg.rho) << "\npsi_a = " << fmt(cfg.psi_a)
         << "\npsi_b = " << fmt(cfg.psi_b) << "\nsigma = " << fmt(cfg.sigma)
         << "\nr_pix = " << fmt(cfg.r_pix) << "\nrho_pix = " << fmt(cfg.rho_pix)
         << "\nh_a = " << cfg.h_a << "\nh_b = " << cfg.h_b
         << "\nbackground_sd = " << fmt(cfg.background_sd)
         << "\nmargin = " << cfg.margin << "\nseed = " << cfg.seed << "\n";
  }

  RunManifest m;
  m.subcommand = "simulate";
  m.config_hash = hash;
  m.seed = cfg.seed;
  m.outputs = {"image.txt", "sites.csv", "truth.csv", "geometry.csv",
               "neighbors.csv", "config_echo.cfg"};
  m.wall_time_s = timer.seconds();
  write_manifest(m, out);
  std::cout << "simulate: " << ds.geometry.n_b() << " B + " << ds.geometry.n_a()
            << " A sites, image " << ds.image.width << "x" << ds.image.height
            << " -> " << out << "\n";
  return 0;
}

int infer_n_per_side(const std::vector<SiteSpec>& specs) {
  int max_ix = 0;
  for (const auto& s : specs)
    if (s.type == SiteType::B) max_ix = std::max(max_ix, std::max(s.grid.ix, s.grid.iy));
  return max_ix + 1;
}

int cmd_detect(const std::string& image_path, const std::string& sites_path,
               int h_a, int h_b, int n_per_side, const std::string& out) {
  Timer timer;
  const Image img = load_image(image_path);
  const auto specs = load_sites(sites_path);
  if (n_per_side == 0) n_per_side = infer_n_per_side(specs);
  const DetectOutput det = detect_sites(img, specs, h_a, h_b, n_per_side);
  fs::create_directories(out);
  write_detect_csv(out + "/detect.csv", det);

  RunManifest m;
  m.subcommand = "detect";
  m.config_hash = "-";
  m.outputs = {"detect.csv"};
  m.wall_time_s = timer.seconds();
  write_manifest(m, out);
  int converged = 0;
  for (const auto& f : det.a_fits) converged += f.converged ? 1 : 0;
  for (const auto& f : det.b_fits) converged += f.converged ? 1 : 0;
  std::cout << "detect: " << converged << "/"
            << det.a_fits.size() + det.b_fits.size() << " fits converged -> "
            << out << "\n";
  return 0;
}

int cmd_fit(const std::string& image_path, const std::string& sites_path,
            const std::string& config_path, const std::string& model, long iters,
            long burnin, int thin, std::uint64_t seed, bool ssvs,
            const std::string& out) {
  Timer timer;
  const Image img = load_image(image_path);
  const auto specs = load_sites(sites_path);

  FitFileConfig fcfg;
  HierPriors priors;
  std::string hash = "-";
  if (!config_path.empty()) {
    const ConfigMap cm = ConfigMap::parse_file(config_path);
    fcfg = parse_fit_config(cm);
    priors = parse_priors(cm, priors);
    hash = hash_file_hex(config_path);
  }
  if (ssvs) priors.ssvs = true;
  const int n_per_side = fcfg.n_b_per_side > 0 ? fcfg.n_b_per_side : infer_n_per_side(specs);

  const FitInputs fit = prepare_fit(img, specs, fcfg.h_a, fcfg.h_b, n_per_side, priors);
  fs::create_directories(out);
  write_detect_csv(out + "/detect.csv", fit.detection);
  write_geometry_csv(out, fit.data.geometry);

  McmcSchedule sched{iters, burnin, thin, seed};
  std::vector<std::string> outputs = {"detect.csv", "geometry.csv", "neighbors.csv"};
  if (model == "hier") {
    const HierFitResult res = run_hier_mcmc(fit.data, fit.priors, fit.init, sched);
    write_chains(out, res.chains, outputs);
    csv::Writer w(out + "/sites_posterior.csv",
                  {"site_id", "type", "mean_x", "mean_y", "sd_x", "sd_y", "cov_xy",
                   "beta_mean", "beta_sd"});
    for (const auto& s : res.sites)
      w.row({std::to_string(s.id), type_name(s.type), fmt(s.mean_x), fmt(s.mean_y),
             fmt(s.sd_x), fmt(s.sd_y), fmt(s.cov_xy), fmt(s.beta_mean),
             fmt(s.beta_sd)});
    outputs.push_back("sites_posterior.csv");
  } else if (model == "simple" || model == "spatial") {
    const BaselinePriors bp;
    const ChainSet chains = run_baseline(
        fit.baseline, model == "simple" ? BaselineModel::simple : BaselineModel::spatial,
        bp, sched);
    write_chains(out, chains, outputs);
  } else {
    throw DomainError("--model must be hier, simple, or spatial");
  }

  RunManifest m;
  m.subcommand = "fit";
  m.config_hash = hash;
  m.seed = seed;
  m.outputs = outputs;
  m.wall_time_s = timer.seconds();
  write_manifest(m, out);
  std::cout << "fit (" << model << "): wrote " << outputs.size() << " files -> "
            << out << "\n";
  return 0;
}

int cmd_study(const std::string& config_path, const std::string& out, int jobs) {
  Timer timer;
  const ConfigMap cm = ConfigMap::parse_file(config_path);
  StudyConfig cfg = parse_study_config(cm);
  cfg.jobs = jobs_or_env(jobs > 0 ? jobs : cfg.jobs);
  fs::create_directories(out);

  const StudyResult res = run_study(cfg, &std::cerr);
  {
    csv::Writer w(out + "/replicates.csv",
                  {"scenario", "replicate", "model", "param", "truth", "post_mean",
                   "post_sd", "hpd_lo", "hpd_hi", "covered"});
    for (const auto& r : res.replicates)
      w.row({r.scenario, std::to_string(r.replicate), r.model, r.param,
             fmt(r.truth), fmt(r.post_mean), fmt(r.post_sd), fmt(r.hpd_lo),
             fmt(r.hpd_hi), r.covered ? "1" : "0"});
  }
  {
    csv::Writer w(out + "/summary.csv",
                  {"scenario", "model", "param", "truth", "bias", "bias_se",
                   "mean_post_sd", "mean_post_sd_se", "coverage_pct", "coverage_se",
                   "mse100", "mse100_se", "n_effective"});
    for (const auto& s : res.summary)
      w.row({s.scenario, s.model, s.param, fmt(s.truth), fmt(s.bias), fmt(s.bias_se),
             fmt(s.mean_post_sd), fmt(s.mean_post_sd_se), fmt(s.coverage_pct),
             fmt(s.coverage_se), fmt(s.mse100), fmt(s.mse100_se),
             std::to_string(s.n_effective)});
  }
  {
    csv::Writer w(out + "/failures.csv", {"scenario", "replicate", "model", "error"});
    for (const auto& f : res.failures)
      w.row({f.scenario, std::to_string(f.replicate), f.model, f.error});
  }

  RunManifest m;
  m.subcommand = "study";
  m.config_hash = hash_file_hex(config_path);
  m.seed = cfg.schedule.seed;
  m.outputs = {"replicates.csv", "summary.csv", "failures.csv"};
  m.wall_time_s = timer.seconds();
  write_manifest(m, out);
  std::cout << "study: " << res.replicates.size() << " records, "
            << res.failures.size() << " failures -> " << out << "\n";
  return 0;
}

int cmd_variogram(const std::string& image_path, const std::string& sites_path,
                  const std::string& residuals_path, double psi_a, double psi_b,
                  int h_a, int h_b, int bins, double max_dist,
                  const std::string& out) {
  Timer timer;
  std::vector<Vec2> coords;
  std::vector<double> residuals;

  if (!residuals_path.empty()) {
    const auto rows = csv::read(residuals_path);
    for (std::size_t i = 1; i < rows.size(); ++i) {
      coords.push_back({std::stod(rows[i][0]), std::stod(rows[i][1])});
      residuals.push_back(std::stod(rows[i][2]));
    }
  } else {
    // Per-window OLS of the approximate data layer at fixed bandwidths;
    // residuals pooled across all windows.
    const Image img = load_image(image_path);
    const auto specs = load_sites(sites_path);
    for (const auto& s : specs) {
      const bool is_a = s.type == SiteType::A;
      const int h = is_a ? h_a : h_b;
      const double psi = is_a ? psi_a : psi_b;
      const int cx = round_half_away(s.approx.x);
      const int cy = round_half_away(s.approx.y);
      const Window w = extract_window(img, cx, cy, h, s.id);
      std::vector<double> x(w.size());
      kernel_weights(w, s.approx, psi, x.data());
      double sx = 0, sy = 0, sxx = 0, sxy = 0;
      const double n = static_cast<double>(w.size());
      for (std::size_t k = 0; k < w.size(); ++k) {
        sx += x[k];
        sy += w.y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * w.y[k];
      }
      const double denom = sxx - sx * sx / n;
      const double slope = denom > 0 ? (sxy - sx * sy / n) / denom : 0.0;
      const double icept = (sy - slope * sx) / n;
      for (std::size_t k = 0; k < w.size(); ++k) {
        coords.push_back({w.px[k], w.py[k]});
        residuals.push_back(w.y[k] - icept - slope * x[k]);
      }
    }
  }

  if (max_dist <= 0.0) {
    double maxd = 0.0;
    for (std::size_t i = 0; i < coords.size(); i += 7)
      for (std::size_t j = i + 1; j < coords.size(); j += 7)
        maxd = std::max(maxd, dist(coords[i], coords[j]));
    max_dist = maxd / 2.0;
  }
  const VariogramEstimate vg = empirical_variogram(coords, residuals, bins, max_dist);
  ExpCovParams fitted{1, 0, 1};
  bool have_fit = true;
  try {
    fitted = fit_exp_variogram(vg);
  } catch (const VariogramFitError& e) {
    std::cerr << "warning: " << e.what() << "\n";
    fitted = e.best;
  } catch (const DomainError& e) {
    std::cerr << "warning: " << e.what() << "\n";
    have_fit = false;
  }

  fs::create_directories(out);
  {
    csv::Writer w(out + "/variogram.csv",
                  {"bin_center", "semivariance", "count", "fitted_gamma"});
    for (std::size_t b = 0; b < vg.bin_centers.size(); ++b)
      w.row({fmt(vg.bin_centers[b]), fmt(vg.semivariances[b]),
             std::to_string(vg.counts[b]),
             have_fit ? fmt(exp_variogram_value(fitted, vg.bin_centers[b])) : "nan"});
  }
  if (have_fit)
    std::cout << "variogram fit: sigma2 = " << fitted.sigma2 << ", r = " << fitted.r
              << ", rho = " << fitted.rho << "\n";

  RunManifest m;
  m.subcommand = "variogram";
  m.config_hash = "-";
  m.outputs = {"variogram.csv"};
  m.wall_time_s = timer.seconds();
  write_manifest(m, out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spatial hierarchical measurement-error modeling for atom-column images"};
  app.require_subcommand(1);

  std::string simd_backend;
  app.add_option("--simd", simd_backend, "Force kernel backend (scalar|avx2|neon|auto)");

  auto* sim = app.add_subcommand("simulate", "Generate a synthetic dataset");
  std::string sim_config, sim_out;
  std::uint64_t sim_seed = 0;
  sim->add_option("--config", sim_config, "Config file with a [simulate] section");
  auto* seed_opt = sim->add_option("--seed", sim_seed, "Override the config seed");
  sim->add_option("--out", sim_out, "Output directory")->required();

  auto* det = app.add_subcommand("detect", "Refine atom-column locations");
  std::string det_image, det_sites, det_out;
  int det_ha = 6, det_hb = 5, det_n = 0;
  det->add_option("--image", det_image, "Image file")->required();
  det->add_option("--sites", det_sites, "Sites CSV with approximate centers")->required();
  det->add_option("--h-a", det_ha, "A-site window half-width");
  det->add_option("--h-b", det_hb, "B-site window half-width");
  det->add_option("--n-per-side", det_n, "B grid side length (default: inferred)");
  det->add_option("--out", det_out, "Output directory")->required();

  auto* fit = app.add_subcommand("fit", "Run MCMC on an image");
  std::string fit_image, fit_sites, fit_config, fit_model = "hier", fit_out;
  long fit_iters = 10000, fit_burnin = 10000;
  int fit_thin = 1;
  std::uint64_t fit_seed = 1;
  bool fit_ssvs = false;
  int fit_jobs = 0;
  fit->add_option("--image", fit_image, "Image file")->required();
  fit->add_option("--sites", fit_sites, "Sites CSV with approximate centers")->required();
  fit->add_option("--config", fit_config, "Config file ([fit] and [priors] sections)");
  fit->add_option("--model", fit_model, "hier | simple | spatial");
  fit->add_option("--iters", fit_iters, "Post burn-in draws");
  fit->add_option("--burnin", fit_burnin, "Burn-in sweeps");
  fit->add_option("--thin", fit_thin, "Thinning interval");
  fit->add_option("--seed", fit_seed, "Chain seed");
  fit->add_flag("--ssvs", fit_ssvs, "Spike-and-slab selection on the slope");
  fit->add_option("--jobs", fit_jobs, "Worker threads (a single chain is sequential)");
  fit->add_option("--out", fit_out, "Output directory")->required();

  auto* study = app.add_subcommand("study", "Replicated simulation study");
  std::string study_config, study_out;
  int study_jobs = 0;
  study->add_option("--config", study_config, "Study config file")->required();
  study->add_option("--jobs", study_jobs, "Worker threads (default: $LATTICE_ME_JOBS)");
  study->add_option("--out", study_out, "Output directory")->required();

  auto* vg = app.add_subcommand("variogram", "Empirical variogram of data-layer residuals");
  std::string vg_image, vg_sites, vg_resid, vg_out;
  double vg_psi_a = 5.0, vg_psi_b = 4.0, vg_maxd = 0.0;
  int vg_ha = 6, vg_hb = 5, vg_bins = 15;
  vg->add_option("--image", vg_image, "Image file");
  vg->add_option("--sites", vg_sites, "Sites CSV");
  vg->add_option("--residuals", vg_resid, "Direct x,y,value CSV (skips the image)");
  vg->add_option("--psi-a", vg_psi_a, "Fixed A bandwidth for the OLS residuals");
  vg->add_option("--psi-b", vg_psi_b, "Fixed B bandwidth");
  vg->add_option("--h-a", vg_ha, "A-site window half-width");
  vg->add_option("--h-b", vg_hb, "B-site window half-width");
  vg->add_option("--bins", vg_bins, "Number of distance bins");
  vg->add_option("--max-dist", vg_maxd, "Largest pair distance (default: half the maximum)");
  vg->add_option("--out", vg_out, "Output directory")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (!simd_backend.empty() && simd_backend != "auto")
      simd::force_backend(simd::parse_backend(simd_backend));

    if (sim->parsed())
      return cmd_simulate(sim_config, sim_seed, seed_opt->count() > 0, sim_out);
    if (det->parsed())
      return cmd_detect(det_image, det_sites, det_ha, det_hb, det_n, det_out);
    if (fit->parsed())
      return cmd_fit(fit_image, fit_sites, fit_config, fit_model, fit_iters,
                     fit_burnin, fit_thin, fit_seed, fit_ssvs, fit_out);
    if (study->parsed()) return cmd_study(study_config, study_out, study_jobs);
    if (vg->parsed())
      return cmd_variogram(vg_image, vg_sites, vg_resid, vg_psi_a, vg_psi_b, vg_ha,
                           vg_hb, vg_bins, vg_maxd, vg_out);
  } catch (const ParseError& e) {
    std::cerr << "error";
    if (e.line > 0)
      std::cerr << " (line " << e.line << (e.col > 0 ? "," + std::to_string(e.col) : "")
                << ")";
    std::cerr << ": " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
