#include "latticeme/lattice.hpp"

#include <cmath>

#include "latticeme/errors.hpp"

namespace latticeme {
namespace {

void fill_neighbors_and_means(LatticeGeometry& g) {
  const int n = g.n_b_per_side;
  g.a_neighbors.clear();
  g.a_means.clear();
  g.a_neighbors.reserve(static_cast<std::size_t>(n - 1) * (n - 1));
  g.a_means.reserve(g.a_neighbors.capacity());
  for (int iy = 0; iy < n - 1; ++iy)
    for (int ix = 0; ix < n - 1; ++ix) {
      const std::array<int, 4> nb = {
          LatticeGeometry::b_index(n, ix, iy),
          LatticeGeometry::b_index(n, ix + 1, iy),
          LatticeGeometry::b_index(n, ix, iy + 1),
          LatticeGeometry::b_index(n, ix + 1, iy + 1),
      };
      g.a_neighbors.push_back(nb);
      Vec2 c{0.0, 0.0};
      for (int k : nb) c = c + g.b_means[k];
      g.a_means.push_back(0.25 * c);
    }
}

}  // namespace

LatticeGeometry build_geometry(int n_b_per_side, double spacing, Vec2 origin) {
  if (n_b_per_side < 2) throw DomainError("build_geometry: need at least a 2x2 B grid");
  if (!(spacing > 0.0)) throw DomainError("build_geometry: spacing must be positive");
  LatticeGeometry g;
  g.n_b_per_side = n_b_per_side;
  g.spacing = spacing;
  g.b_means.reserve(static_cast<std::size_t>(n_b_per_side) * n_b_per_side);
  for (int iy = 0; iy < n_b_per_side; ++iy)
    for (int ix = 0; ix < n_b_per_side; ++ix)
      g.b_means.push_back({origin.x + spacing * ix, origin.y + spacing * iy});
  fill_neighbors_and_means(g);
  return g;
}

LatticeGeometry fit_geometry(std::span<const Vec2> detected_b,
                             std::span<const GridIndex> index, int n_per_side) {
  if (n_per_side < 2) throw DomainError("fit_geometry: need at least a 2x2 B grid");
  if (detected_b.size() != index.size())
    throw DomainError("fit_geometry: location/index length mismatch");
  if (detected_b.size() < 4) throw DomainError("fit_geometry: need at least four sites");

  // Affine model (x,y) = o + ix*u + iy*v, one least-squares system per
  // output coordinate sharing the 3x3 normal matrix in (1, ix, iy).
  Matrix nmat(3, 3);
  double bx[3] = {0, 0, 0};
  double by[3] = {0, 0, 0};
  for (std::size_t k = 0; k < detected_b.size(); ++k) {
    const double f[3] = {1.0, static_cast<double>(index[k].ix),
                         static_cast<double>(index[k].iy)};
    for (int a = 0; a < 3; ++a) {
      bx[a] += f[a] * detected_b[k].x;
      by[a] += f[a] * detected_b[k].y;
      for (int b = 0; b <= a; ++b) nmat(a, b) += f[a] * f[b];
    }
  }
  for (int a = 0; a < 3; ++a)
    for (int b = a + 1; b < 3; ++b) nmat(a, b) = nmat(b, a);
  const Cholesky ch = Cholesky::compute(nmat);
  ch.solve(bx);
  ch.solve(by);
  const Vec2 origin{bx[0], by[0]};
  const Vec2 u{bx[1], by[1]};
  const Vec2 v{bx[2], by[2]};

  LatticeGeometry g;
  g.n_b_per_side = n_per_side;
  g.spacing = 0.5 * (std::hypot(u.x, u.y) + std::hypot(v.x, v.y));
  g.b_means.reserve(static_cast<std::size_t>(n_per_side) * n_per_side);
  for (int iy = 0; iy < n_per_side; ++iy)
    for (int ix = 0; ix < n_per_side; ++ix)
      g.b_means.push_back(origin + static_cast<double>(ix) * u +
                          static_cast<double>(iy) * v);
  fill_neighbors_and_means(g);
  return g;
}

Vec2 unweighted_center(std::span<const Vec2> b_locations) {
  if (b_locations.size() != 4)
    throw DomainError("unweighted_center: expected the four neighbors of one A-site");
  Vec2 c{0.0, 0.0};
  for (const Vec2& s : b_locations) c = c + s;
  return 0.25 * c;
}

Vec2 weighted_center(std::span<const Vec2> b_locations,
                     std::span<const double> betas) {
  if (b_locations.size() != 4 || betas.size() != 4)
    throw DomainError("weighted_center: expected four locations and four weights");
  double total = 0.0;
  Vec2 c{0.0, 0.0};
  for (std::size_t k = 0; k < 4; ++k) {
    total += betas[k];
    c = c + betas[k] * b_locations[k];
  }
  if (!(total > 0.0))
    throw DomainError("weighted_center: total weight must be positive");
  return (1.0 / total) * c;
}

}  // namespace latticeme
