#ifndef LATTICEME_SIMULATE_HPP
#define LATTICEME_SIMULATE_HPP

#include <cstdint>
#include <vector>

#include "latticeme/imaging.hpp"
#include "latticeme/lattice.hpp"
#include "latticeme/rng.hpp"

// Synthetic dataset generation: B-sites around an expected grid, intensity
// coefficients, A-sites from the process layer with a spatial residual, and
// pixel intensities with correlated noise inside buffered boxes around each
// atom; everything outside the boxes is iid background.

namespace latticeme {

struct SimConfig {
  int n_b_per_side = 19;
  double spacing = 40.0;  // pixels between B grid means
  double sigma_b = 0.25;  // B displacement SD

  double beta0 = 87.0;
  double mu_beta_a = 3060.0;
  double mu_beta_b = 1425.0;
  double sd_beta_a = 150.0;  // intensity spread across columns, SD
  double sd_beta_b = 150.0;

  double alpha0 = -0.08;
  double alpha1 = -0.15;
  double sigma_a = 0.4;  // process residual SD
  double r = 0.73;
  double rho = 100.0;

  double psi_a = 4.3;
  double psi_b = 3.7;
  double sigma = 140.0;  // pixel noise SD
  double r_pix = 0.57;
  double rho_pix = 5.5;

  int h_a = 6;  // analysis window half-widths
  int h_b = 5;
  double background_sd = 25.0;  // the iid N(beta0, 25) layer, read as SD

  int margin = 0;  // image border around the grid; 0 derives max(h)+7
  std::uint64_t seed = 0;

  int effective_margin() const;
  void validate() const;
};

struct SyntheticDataset {
  Image image;
  std::vector<AtomSite> truth;  // B sites first (grid order), then A sites
  LatticeGeometry geometry;
  SimConfig config;

  const AtomSite& b_site(int j) const { return truth[j]; }
  const AtomSite& a_site(int j) const { return truth[geometry.n_b() + j]; }
};

SyntheticDataset simulate_dataset(const SimConfig& cfg, const Rng& rng);

// Sample moments of the drawn quantities, for smoke-testing generation.
struct SimChecks {
  double mean_beta_a = 0.0, sd_beta_a = 0.0;
  double mean_beta_b = 0.0, sd_beta_b = 0.0;
  double sd_b_displacement = 0.0;  // pooled x/y
  double ols_intercept = 0.0;      // pooled displacement on psi, true values
  double ols_slope = 0.0;
};

SimChecks empirical_checks(const SyntheticDataset& ds);

// Pooled covariate/response of the process layer computed from given site
// locations and intensities (truth or estimates).
struct ProcessVectors {
  std::vector<double> delta_x, delta_y;  // s_A - u per coordinate
  std::vector<double> psi_x, psi_y;      // w - u per coordinate
};

ProcessVectors process_vectors(const LatticeGeometry& geom,
                               std::span<const Vec2> b_locations,
                               std::span<const double> b_betas,
                               std::span<const Vec2> a_locations);

}  // namespace latticeme

#endif
