#include "latticeme/kernel.hpp"

#include "latticeme/errors.hpp"
#include "latticeme/simd.hpp"

namespace latticeme {

double kernel_value(Vec2 p, Vec2 s, double psi) {
  if (!(psi > 0.0)) throw DomainError("kernel_value: psi must be positive");
  double out;
  const double px = p.x, py = p.y;
  simd::kernels().gauss_weights(&px, &py, 1, s.x, s.y, -0.5 / (psi * psi), &out);
  return out;
}

void kernel_weights(const Window& w, Vec2 s, double psi, double* out) {
  if (!(psi > 0.0)) throw DomainError("kernel_weights: psi must be positive");
  simd::kernels().gauss_weights(w.px.data(), w.py.data(), w.size(), s.x, s.y,
                                -0.5 / (psi * psi), out);
}

std::vector<double> window_mean(const Window& w, Vec2 s, double beta0,
                                double beta, double psi) {
  std::vector<double> mu(w.size());
  kernel_weights(w, s, psi, mu.data());
  for (double& v : mu) v = beta0 + beta * v;
  return mu;
}

}  // namespace latticeme
