#pragma once

#include <cmath>
#include <memory>

#include "fedmm/problem.hpp"

namespace fedmm {

namespace detail {

// h(x,y) = x^2 + 3 sin^2(x) sin^2(y) - 4 y^2 - 10 sin^2(y), a nonconvex-
// nonconcave scalar function with a two-sided PL structure and saddle (0,0).
// Since 3 sin^2(x) <= 10, h(x,y) <= h(x,0) = x^2 for every x, so
// y*(x) = 0 and Phi(x) = x^2 exactly.
inline double plpl_value(double x, double y) {
  const double sx = std::sin(x), sy = std::sin(y);
  return x * x + 3.0 * sx * sx * sy * sy - 4.0 * y * y - 10.0 * sy * sy;
}
inline double plpl_gx(double x, double y) {
  const double sy = std::sin(y);
  return 2.0 * x + 3.0 * std::sin(2.0 * x) * sy * sy;
}
inline double plpl_gy(double x, double y) {
  const double sx = std::sin(x);
  return 3.0 * sx * sx * std::sin(2.0 * y) - 8.0 * y - 10.0 * std::sin(2.0 * y);
}
// Analytic 2x2 Hessian entries.
inline void plpl_hessian(double x, double y, double* hxx, double* hxy, double* hyy) {
  const double sx = std::sin(x), sy = std::sin(y);
  *hxx = 2.0 + 6.0 * std::cos(2.0 * x) * sy * sy;
  *hxy = 3.0 * std::sin(2.0 * x) * std::sin(2.0 * y);
  *hyy = 6.0 * sx * sx * std::cos(2.0 * y) - 8.0 - 20.0 * std::cos(2.0 * y);
}

struct PlplEstimates {
  double l, mu1, mu2;
};

// Grid estimates over [-3,3]^2: l as the max Hessian spectral norm, mu1/mu2
// as the min PL ratios |grad|^2 / (2 * suboptimality). The inner optima are
// analytic: min_x h(.,y) = h(0,y), max_y h(x,.) = h(x,0).
inline PlplEstimates plpl_grid_estimates() {
  const double lo = -3.0, hi = 3.0;
  const int n = 601;
  double l = 0, mu1 = std::numeric_limits<double>::infinity(), mu2 = mu1;
  for (int i = 0; i < n; ++i) {
    const double x = lo + (hi - lo) * i / (n - 1);
    for (int j = 0; j < n; ++j) {
      const double y = lo + (hi - lo) * j / (n - 1);
      double hxx, hxy, hyy;
      plpl_hessian(x, y, &hxx, &hxy, &hyy);
      const double tr = hxx + hyy, det = hxx * hyy - hxy * hxy;
      const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
      l = std::max({l, std::abs(0.5 * tr + disc), std::abs(0.5 * tr - disc)});
      const double gapx = plpl_value(x, y) - plpl_value(0.0, y);
      if (gapx > 1e-10) {
        const double g = plpl_gx(x, y);
        mu1 = std::min(mu1, g * g / (2.0 * gapx));
      }
      const double gapy = plpl_value(x, 0.0) - plpl_value(x, y);
      if (gapy > 1e-10) {
        const double g = plpl_gy(x, y);
        mu2 = std::min(mu2, g * g / (2.0 * gapy));
      }
    }
  }
  return {l, mu1, mu2};
}

}  // namespace detail

/// Deterministic two-sided-PL testbed; every client holds the same scalar
/// function h. An optional noise knob adds simulated gradient noise.
inline ProblemSpec make_plpl_testbed(int M, double noise_sigma = 0.0,
                                     std::uint64_t seed = 0) {
  if (M < 1) throw ConfigError({"plpl: M must be >= 1"});

  ProblemSpec p;
  p.dim_x = 1;
  p.dim_y = 1;
  p.constraint = ConstraintSet::Unconstrained(1);
  p.family = "plpl";

  for (int i = 0; i < M; ++i) {
    ClientShard shard;
    shard.client_id = i;
    shard.full_oracle = [](const Vec& x, const Vec& y) {
      GradPair g{Vec(1), Vec(1)};
      g.gx[0] = detail::plpl_gx(x[0], y[0]);
      g.gy[0] = detail::plpl_gy(x[0], y[0]);
      return g;
    };
    shard.full_value = [](const Vec& x, const Vec& y) {
      return detail::plpl_value(x[0], y[0]);
    };
    shard.oracle = [noise_sigma](const Vec& x, const Vec& y, int batch, RngStream& rng) {
      GradPair g{Vec(1), Vec(1)};
      g.gx[0] = detail::plpl_gx(x[0], y[0]);
      g.gy[0] = detail::plpl_gy(x[0], y[0]);
      if (noise_sigma > 0) {
        const double sd = noise_sigma / std::sqrt(2.0 * batch);
        g.gx[0] += sd * rng.normal();
        g.gy[0] += sd * rng.normal();
      }
      return g;
    };
    p.clients.push_back(std::move(shard));
  }

  static const detail::PlplEstimates est = detail::plpl_grid_estimates();
  p.constants.l = est.l;
  p.constants.mu = est.mu2;
  p.constants.mu1 = est.mu1;
  p.constants.mu2 = est.mu2;
  p.constants.sigma = noise_sigma;
  p.constants.sigma_G = 0.0;
  p.constants.phi_star = 0.0;
  p.constants.estimated = {"l", "mu", "mu1", "mu2"};

  auto& cf = p.closed_form;
  cf.y_star = [](const Vec&) { return Vec::Zero(1).eval(); };
  cf.phi = [](const Vec& x) { return x[0] * x[0]; };
  cf.grad_phi = [](const Vec& x) { return (2.0 * x).eval(); };
  cf.saddle = std::make_pair(Vec::Zero(1), Vec::Zero(1));
  cf.target_x = Vec::Zero(1);
  cf.target_y = Vec::Zero(1);

  p.params = {{"clients", M}, {"noise_sigma", noise_sigma}, {"seed", seed}};
  return p;
}

}  // namespace fedmm
