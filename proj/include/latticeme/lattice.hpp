#ifndef LATTICEME_LATTICE_HPP
#define LATTICEME_LATTICE_HPP

#include <array>
#include <span>
#include <vector>

#include "latticeme/linalg.hpp"

// Perovskite lattice geometry: the expected B-site grid, the fixed A-B
// neighbor topology, and the unweighted / intensity-weighted centers that
// drive the process layer. Neighbors are assigned by grid indices, never by
// nearest-neighbor search, so location moves cannot re-wire the topology.

namespace latticeme {

enum class SiteType { A, B };

struct AtomSite {
  int id = -1;
  SiteType type = SiteType::B;
  Vec2 location;
  double intensity = 0.0;
};

struct GridIndex {
  int ix = 0;
  int iy = 0;
};

struct LatticeGeometry {
  int n_b_per_side = 0;
  double spacing = 0.0;
  std::vector<Vec2> b_means;                    // n^2, row-major (iy*n + ix)
  std::vector<std::array<int, 4>> a_neighbors;  // (n-1)^2, row-major; order
                                                // (ix,iy),(ix+1,iy),(ix,iy+1),(ix+1,iy+1)
  std::vector<Vec2> a_means;                    // unweighted centers of the grid means

  int n_b() const { return n_b_per_side * n_b_per_side; }
  int n_a() const { return (n_b_per_side - 1) * (n_b_per_side - 1); }
  static int b_index(int n, int ix, int iy) { return iy * n + ix; }
};

LatticeGeometry build_geometry(int n_b_per_side, double spacing, Vec2 origin);

// Expected grid for a real image: affine least-squares fit of detected
// B-site locations against their grid indices, initialized from the corner
// sites. Requires at least the four corners.
LatticeGeometry fit_geometry(std::span<const Vec2> detected_b,
                             std::span<const GridIndex> index, int n_per_side);

Vec2 unweighted_center(std::span<const Vec2> b_locations);
Vec2 weighted_center(std::span<const Vec2> b_locations,
                     std::span<const double> betas);

}  // namespace latticeme

#endif
