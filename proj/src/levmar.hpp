#ifndef LATTICEME_LEVMAR_HPP
#define LATTICEME_LEVMAR_HPP

#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

#include "latticeme/errors.hpp"
#include "latticeme/linalg.hpp"

// Damped Gauss-Newton (Levenberg-style lambda adaptation) with analytic
// Jacobians, shared by the peak fitter and the variogram fitter. Converged
// means both the relative RSS change and the step norm fell below tolerance.

namespace latticeme::detail {

struct LevMarOptions {
  int max_iter = 200;
  double tol_rel_rss = 1e-10;
  double tol_step = 1e-8;
  double lambda0 = 1e-3;
};

struct LevMarResult {
  std::vector<double> x;
  double rss = 0.0;
  bool converged = false;
  int iterations = 0;
};

// eval(x, resid, jac): fill residuals, and the n_resid x n_param Jacobian
// when jac != nullptr. project(x): optional in-place box projection.
inline LevMarResult levmar(
    const std::function<void(const std::vector<double>&, std::vector<double>&, Matrix*)>& eval,
    std::vector<double> x0, std::size_t n_resid, const LevMarOptions& opt,
    const std::function<void(std::vector<double>&)>& project = nullptr) {
  const std::size_t p = x0.size();
  std::vector<double> resid(n_resid), resid_new(n_resid);
  Matrix jac(n_resid, p);

  auto rss_of = [&](const std::vector<double>& r) {
    double s = 0.0;
    for (double v : r) s += v * v;
    return s;
  };

  if (project) project(x0);
  eval(x0, resid, &jac);
  double rss = rss_of(resid);
  double lambda = opt.lambda0;

  LevMarResult res;
  res.x = x0;
  res.rss = rss;

  for (int iter = 0; iter < opt.max_iter; ++iter) {
    res.iterations = iter + 1;
    // Normal equations.
    Matrix nmat(p, p);
    std::vector<double> g(p, 0.0);
    for (std::size_t k = 0; k < n_resid; ++k) {
      const double* jk = jac.row(k);
      for (std::size_t a = 0; a < p; ++a) {
        g[a] += jk[a] * resid[k];
        for (std::size_t b = 0; b <= a; ++b) nmat(a, b) += jk[a] * jk[b];
      }
    }
    for (std::size_t a = 0; a < p; ++a)
      for (std::size_t b = a + 1; b < p; ++b) nmat(a, b) = nmat(b, a);

    bool stepped = false;
    for (int tries = 0; tries < 40 && !stepped; ++tries) {
      Matrix damped = nmat;
      for (std::size_t a = 0; a < p; ++a) {
        const double d = nmat(a, a);
        damped(a, a) = d + lambda * (d > 0.0 ? d : 1.0);
      }
      std::vector<double> step(p);
      try {
        const Cholesky ch = Cholesky::compute(damped);
        for (std::size_t a = 0; a < p; ++a) step[a] = -g[a];
        ch.solve(step.data());
      } catch (const FactorizationError&) {
        lambda *= 11.0;
        continue;
      }
      std::vector<double> x_new = res.x;
      for (std::size_t a = 0; a < p; ++a) x_new[a] += step[a];
      if (project) project(x_new);
      eval(x_new, resid_new, nullptr);
      const double rss_new = rss_of(resid_new);
      if (std::isfinite(rss_new) && rss_new <= rss) {
        // Step size measured after projection, so a clamped parameter can
        // still satisfy the convergence criterion.
        double step_norm = 0.0;
        for (std::size_t a = 0; a < p; ++a) {
          const double d = x_new[a] - res.x[a];
          step_norm += d * d;
        }
        step_norm = std::sqrt(step_norm);
        const double rel_drop = (rss - rss_new) / (rss > 0.0 ? rss : 1.0);
        res.x = x_new;
        rss = rss_new;
        res.rss = rss;
        lambda = std::max(lambda / 9.0, 1e-12);
        stepped = true;
        if (rel_drop < opt.tol_rel_rss && step_norm < opt.tol_step) {
          res.converged = true;
          eval(res.x, resid, &jac);
          return res;
        }
      } else {
        lambda *= 11.0;
      }
    }
    if (!stepped) {
      // Damping maxed out without an acceptable step: treat the current
      // point as stationary.
      res.converged = true;
      return res;
    }
    eval(res.x, resid, &jac);
  }
  return res;  // converged stays false
}

}  // namespace latticeme::detail

#endif
