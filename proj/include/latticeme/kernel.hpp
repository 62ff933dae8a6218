#ifndef LATTICEME_KERNEL_HPP
#define LATTICEME_KERNEL_HPP

#include <vector>

#include "latticeme/imaging.hpp"
#include "latticeme/linalg.hpp"

// Gaussian intensity kernel of the data layer.

namespace latticeme {

struct DataLayerParams {
  double beta0 = 0.0;
  double psi_a = 1.0;  // bandwidth, pixels
  double psi_b = 1.0;
};

// exp(-|p-s|^2 / (2 psi^2))
double kernel_value(Vec2 p, Vec2 s, double psi);

// X vector: kernel value at every window pixel, window pixel order.
void kernel_weights(const Window& w, Vec2 s, double psi, double* out);

// Per-pixel mean beta0 + beta * kernel; only the owning atom contributes.
std::vector<double> window_mean(const Window& w, Vec2 s, double beta0,
                                double beta, double psi);

}  // namespace latticeme

#endif
