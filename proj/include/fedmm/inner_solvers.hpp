#pragma once

#include <cmath>
#include <optional>

#include "fedmm/problem.hpp"

namespace fedmm {

/// Settings for the iterative inner oracles (argmax in y, argmin in x,
/// nested min-max). Defaults assume strongly convex/concave or PL inner
/// problems, where convergence is linear.
struct InnerSolverConfig {
  int max_iters = 100000;
  double tol = 1e-8;
  std::optional<double> step;  // default 1/l (scaled for smoothed objectives)
};

struct InnerStatus {
  bool converged = false;
  int iters = 0;
  double residual = 0;
};

struct MaxYResult {
  Vec y;
  double phi;  // f(x, y) at the returned maximizer estimate
  InnerStatus status;
};

/// argmax_y f(x, .) by projected gradient ascent; stops when the projected
/// gradient mapping norm falls below tol. Meaningful when f(x, .) is strongly
/// concave or PL; callers treat capped results as approximate.
inline MaxYResult inner_max_y(const ProblemSpec& p, const Vec& x, const InnerSolverConfig& cfg,
                              std::optional<Vec> warm_start = std::nullopt) {
  const double step = cfg.step.value_or(1.0 / p.constants.l);
  Vec y = warm_start ? project(p.constraint, *warm_start)
                     : project(p.constraint, Vec::Zero(p.dim_y));
  InnerStatus st;
  for (st.iters = 0; st.iters < cfg.max_iters; ++st.iters) {
    const GradPair g = full_gradient(p, x, y);
    st.residual = gradient_mapping(p.constraint, y, g.gy, step).norm();
    if (st.residual <= cfg.tol) {
      st.converged = true;
      break;
    }
    y = project(p.constraint, y + step * g.gy);
  }
  return {y, full_value(p, x, y), st};
}

struct MinXResult {
  Vec x;
  double value;  // fhat(x, y, z) at the returned minimizer estimate
  InnerStatus status;
};

/// argmin_x fhat(., y, z) = f(., y) + p/2 |. - z|^2 by gradient descent;
/// strongly convex whenever p > l.
inline MinXResult argmin_x_fhat(const ProblemSpec& p, const Vec& y, const Vec& z, double p_smooth,
                                const InnerSolverConfig& cfg, std::optional<Vec> warm_start = std::nullopt) {
  const double step = cfg.step.value_or(1.0 / (p.constants.l + p_smooth));
  Vec x = warm_start ? *warm_start : Vec(z);
  InnerStatus st;
  for (st.iters = 0; st.iters < cfg.max_iters; ++st.iters) {
    Vec gx = full_gradient(p, x, y).gx + p_smooth * (x - z);
    st.residual = gx.norm();
    if (st.residual <= cfg.tol) {
      st.converged = true;
      break;
    }
    x -= step * gx;
  }
  return {x, fhat_value(p, x, y, z, p_smooth), st};
}

namespace detail {

// Smoothness bound for Phi(x) = max_y f(x,y) under a PL max player; falls
// back to a conservative multiple when no modulus is declared.
inline double phi_smoothness(const KnownConstants& c) {
  const double l = c.l;
  if (c.mu && *c.mu > 0) return l + l * l / *c.mu;
  if (c.mu2 && *c.mu2 > 0) return l + l * l / *c.mu2;
  return 20.0 * l;
}

}  // namespace detail

struct CapPResult {
  Vec x;       // argmin_x max_y fhat(x, y, z)
  Vec y;       // maximizer at that x
  double value;
  InnerStatus status;
  bool heuristic = false;  // no PL/strong-concavity modulus was declared
};

/// P(z) = min_x max_y fhat(x,y,z) by nested descent: outer gradient descent on
/// x with Phi-gradients from warm-started inner maximizations.
inline CapPResult solve_cap_p(const ProblemSpec& p, const Vec& z, double p_smooth,
                              const InnerSolverConfig& cfg,
                              std::optional<Vec> warm_x = std::nullopt,
                              std::optional<Vec> warm_y = std::nullopt) {
  InnerSolverConfig inner = cfg;
  inner.step.reset();
  const double outer_step = cfg.step.value_or(1.0 / (detail::phi_smoothness(p.constants) + p_smooth));
  CapPResult out;
  out.heuristic = !(p.constants.mu || p.constants.mu2);
  Vec x = warm_x ? *warm_x : Vec(z);
  std::optional<Vec> y = warm_y;
  InnerStatus st;
  bool inner_capped = false;
  for (st.iters = 0; st.iters < cfg.max_iters; ++st.iters) {
    const MaxYResult my = inner_max_y(p, x, inner, y);
    inner_capped = inner_capped || !my.status.converged;
    y = my.y;
    Vec gx = full_gradient(p, x, *y).gx + p_smooth * (x - z);
    st.residual = gx.norm();
    if (st.residual <= cfg.tol) {
      st.converged = true;
      break;
    }
    x -= outer_step * gx;
  }
  st.converged = st.converged && !inner_capped;
  out.x = std::move(x);
  out.y = *y;
  out.value = fhat_value(p, out.x, out.y, z, p_smooth);
  out.status = st;
  return out;
}

}  // namespace fedmm
