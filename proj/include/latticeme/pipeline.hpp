#ifndef LATTICEME_PIPELINE_HPP
#define LATTICEME_PIPELINE_HPP

#include <span>
#include <vector>

#include "latticeme/baseline.hpp"
#include "latticeme/detect.hpp"
#include "latticeme/hier.hpp"
#include "latticeme/imaging.hpp"
#include "latticeme/lattice.hpp"

// The shared fit workflow: place detection boxes at the supplied approximate
// centers, refine with the peak fitter, rebuild the analysis windows at the
// rounded estimates, anchor the expected grid, and assemble sampler inputs.

namespace latticeme {

struct SiteSpec {
  int id = -1;
  SiteType type = SiteType::B;
  GridIndex grid;
  Vec2 approx;  // approximate center (user-supplied grid, config, or truth)
};

struct DetectOutput {
  // Dense grid order: A index iy*(n-1)+ix, B index iy*n+ix.
  std::vector<GaussianPeakFit> a_fits, b_fits;
  std::vector<SiteSpec> a_sites, b_sites;
  int n_per_side = 0;
};

DetectOutput detect_sites(const Image& img, std::span<const SiteSpec> sites,
                          int h_a, int h_b, int n_per_side);

struct FitInputs {
  HierData data;
  HierPriors priors;
  HierState init;
  BaselineData baseline;
  DetectOutput detection;
};

FitInputs prepare_fit(const Image& img, std::span<const SiteSpec> sites, int h_a,
                      int h_b, int n_per_side, const HierPriors& base_priors,
                      bool strict_baseline = false);

}  // namespace latticeme

#endif
