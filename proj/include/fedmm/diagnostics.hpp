#pragma once

#include <map>
#include <optional>
#include <string>

#include "fedmm/inner_solvers.hpp"
#include "fedmm/optim.hpp"

namespace fedmm {

/// Stationarity measures at a point. Norms computed from exact full-batch
/// gradients regardless of how the point was produced; fields backed by a
/// capped inner solve carry approximate = true.
struct StationarityReport {
  double grad_x_norm = 0;       // |grad_x f|
  double grad_map_y_norm = 0;   // l |P_Y(y + grad_y f / l) - y|
  std::optional<double> phi_grad_norm;
  std::optional<double> moreau_grad_norm;
  bool approximate = false;
};

/// (eps1, eps2)-stationarity of f: x-gradient norm and the projected gradient
/// mapping norm at step 1/l.
inline StationarityReport f_stationarity(const ProblemSpec& p, const Vec& x, const Vec& y) {
  const GradPair g = full_gradient(p, x, y);
  StationarityReport rep;
  rep.grad_x_norm = g.gx.norm();
  rep.grad_map_y_norm = gradient_mapping(p.constraint, y, g.gy, 1.0 / p.constants.l).norm();
  return rep;
}

struct ScalarDiagnostic {
  double value = 0;
  bool approximate = false;  // backed by a capped or heuristic inner solve
};

/// |grad Phi(x)| via grad_x f(x, y*(x)) with y*(x) from the iterative inner
/// maximizer.
inline ScalarDiagnostic phi_stationarity(const ProblemSpec& p, const Vec& x,
                                         const InnerSolverConfig& cfg,
                                         std::optional<Vec> warm_y = std::nullopt) {
  const MaxYResult my = inner_max_y(p, x, cfg, std::move(warm_y));
  return {full_gradient(p, x, my.y).gx.norm(), !my.status.converged};
}

/// |grad Phi_{1/2l}(x)| = 2l |x - prox(x)| with the proximal point
/// prox(x) = argmin_u Phi(u) + l |u - x|^2 from the nested solver.
inline ScalarDiagnostic moreau_stationarity(const ProblemSpec& p, const Vec& x,
                                            const InnerSolverConfig& cfg) {
  const double ps = 2.0 * p.constants.l;
  const CapPResult prox = solve_cap_p(p, x, ps, cfg, x);
  return {ps * (x - prox.x).norm(), !prox.status.converged || prox.heuristic};
}

/// Potential V(x,y,z) = fhat(x,y,z) - 2 Psi(y,z) + 2 P(z) and its pieces.
struct PotentialReport {
  double v = 0;
  double fhat = 0;
  double psi = 0;
  double cap_p = 0;
  bool approximate = false;
};

inline PotentialReport potential(const ProblemSpec& p, const ParamState& state, double p_smooth,
                                 const InnerSolverConfig& cfg) {
  PotentialReport rep;
  rep.fhat = fhat_value(p, state.x, state.y, state.z, p_smooth);
  if (p.closed_form.psi && p.closed_form.cap_p) {
    rep.psi = p.closed_form.psi(state.y, state.z, p_smooth);
    rep.cap_p = p.closed_form.cap_p(state.z, p_smooth);
  } else {
    const MinXResult mx = argmin_x_fhat(p, state.y, state.z, p_smooth, cfg);
    const CapPResult cp = solve_cap_p(p, state.z, p_smooth, cfg, state.x, state.y);
    rep.psi = mx.value;
    rep.cap_p = cp.value;
    rep.approximate = !mx.status.converged || !cp.status.converged || cp.heuristic;
  }
  rep.v = rep.fhat - 2.0 * rep.psi + 2.0 * rep.cap_p;
  return rep;
}

struct TranslationResult {
  Vec x_hat;
  ScalarDiagnostic phi_stationarity;  // of the original problem at x_hat
  std::int64_t rounds_used = 0;
  bool converged = false;
};

/// Proximal-point translation: from an approximately f-stationary (x~, y~),
/// solve min_x max_y { f(x,y) + l |x - x~|^2 } with the federated algorithm
/// under the strongly-convex two-sided schedule, and return the solution
/// together with its Phi-stationarity on the original problem. The augmented
/// objective is 3l-smooth and l-strongly convex in x.
inline TranslationResult translate_to_phi_stationary(const ProblemSpec& p, const Vec& x_tilde,
                                                     const Vec& y_tilde,
                                                     const FederationConfig& fed,
                                                     const InnerSolverConfig& cfg,
                                                     std::uint64_t seed = 17) {
  p.check_point(x_tilde, y_tilde);
  if (!p.constants.mu)
    throw ConfigError({"translate_to_phi_stationary requires constants.mu (PL-in-y assumption)"});
  const double l = p.constants.l;

  ProblemSpec aug = p;
  aug.family = "proximal_translation(" + p.family + ")";
  for (std::size_t i = 0; i < aug.clients.size(); ++i) {
    const ClientShard base = p.clients[i];
    auto& shard = aug.clients[i];
    shard.oracle = [base, l, x_tilde](const Vec& x, const Vec& y, int batch, RngStream& rng) {
      GradPair g = base.oracle(x, y, batch, rng);
      g.gx += 2.0 * l * (x - x_tilde);
      return g;
    };
    shard.full_oracle = [base, l, x_tilde](const Vec& x, const Vec& y) {
      GradPair g = base.full_oracle(x, y);
      g.gx += 2.0 * l * (x - x_tilde);
      return g;
    };
    shard.full_value = [base, l, x_tilde](const Vec& x, const Vec& y) {
      return base.full_value(x, y) + l * (x - x_tilde).squaredNorm();
    };
  }
  aug.constants.l = 3.0 * l;
  aug.constants.mu1 = l;  // strong convexity in x implies PL in x
  aug.constants.mu2 = p.constants.mu;
  aug.constants.mu = p.constants.mu;
  aug.closed_form = ClosedFormOracles{};

  const HyperParams hp = preset_hyperparams(PresetSetting::pl_pl, aug.constants, fed, 1);

  ParamState state;
  state.x = x_tilde;
  state.y = project(p.constraint, y_tilde);
  state.z = x_tilde;
  const RngStream run_stream{seed};
  TranslationResult out;
  const std::int64_t chunk = 512;
  const std::int64_t max_rounds = std::max<std::int64_t>(cfg.max_iters, chunk);
  while (state.t < max_rounds) {
    for (std::int64_t i = 0; i < chunk && state.t < max_rounds; ++i)
      state = fessgda_round(aug, state, hp, fed, run_stream);
    const StationarityReport rep = f_stationarity(aug, state.x, state.y);
    if (rep.grad_x_norm <= cfg.tol * std::max(1.0, l) &&
        rep.grad_map_y_norm <= cfg.tol * std::max(1.0, l)) {
      out.converged = true;
      break;
    }
  }
  if (!state.x.allFinite()) throw Error("translate_to_phi_stationary: augmented run diverged");
  out.rounds_used = state.t;
  out.x_hat = state.x;
  out.phi_stationarity = phi_stationarity(p, out.x_hat, cfg, state.y);
  out.phi_stationarity.approximate = out.phi_stationarity.approximate || !out.converged;
  return out;
}

// ---------------------------------------------------------------------------
// Metric registry for trace emission.

struct MetricContext {
  const ProblemSpec* problem = nullptr;
  double p_smooth = 0;     // hp.p of the run, for x_minus_z / potential metrics
  double eta_y_K = 0;      // effective eta_y * K, for the y_plus gap
  InnerSolverConfig inner;
};

inline const std::vector<std::string>& available_metrics() {
  static const std::vector<std::string> names = {
      "grad_x_norm", "grad_map_y_norm", "f_value",        "x_minus_z_norm", "dist_to_target",
      "phi_grad_norm", "moreau_grad_norm", "potential_v", "y_plus_gap"};
  return names;
}

inline bool is_metric(const std::string& name) {
  for (const auto& n : available_metrics())
    if (n == name) return true;
  return false;
}

inline double eval_metric(const std::string& name, const MetricContext& ctx,
                          const ParamState& s) {
  const ProblemSpec& p = *ctx.problem;
  if (name == "grad_x_norm") return f_stationarity(p, s.x, s.y).grad_x_norm;
  if (name == "grad_map_y_norm") return f_stationarity(p, s.x, s.y).grad_map_y_norm;
  if (name == "f_value") return full_value(p, s.x, s.y);
  if (name == "x_minus_z_norm") return (s.x - s.z).norm();
  if (name == "dist_to_target") {
    double d = 0;
    if (p.closed_form.target_x) d += (s.x - *p.closed_form.target_x).squaredNorm();
    if (p.closed_form.target_y) d += (s.y - *p.closed_form.target_y).squaredNorm();
    return d;
  }
  if (name == "phi_grad_norm") return phi_stationarity(p, s.x, ctx.inner, s.y).value;
  if (name == "moreau_grad_norm") return moreau_stationarity(p, s.x, ctx.inner).value;
  if (name == "potential_v") return potential(p, s, ctx.p_smooth, ctx.inner).v;
  if (name == "y_plus_gap") {
    // |y+(z) - y| with y+(z) = P_Y(y + eta_y K grad_y f(x*(y,z), y)); a
    // proof-level quantity exposed behind the verbose metric set.
    Vec xs = p.closed_form.x_star_of_yz
                 ? p.closed_form.x_star_of_yz(s.y, s.z, ctx.p_smooth)
                 : argmin_x_fhat(p, s.y, s.z, ctx.p_smooth, ctx.inner, s.x).x;
    const GradPair g = full_gradient(p, xs, s.y);
    const Vec y_plus = project(p.constraint, s.y + ctx.eta_y_K * g.gy);
    return (y_plus - s.y).norm();
  }
  throw ConfigError({"unknown metric '" + name + "'"});
}

}  // namespace fedmm
