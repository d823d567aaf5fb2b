#pragma once

#include <chrono>
#include <functional>
#include <future>
#include <optional>
#include <utility>
#include <vector>

#include "fedmm/federation.hpp"
#include "fedmm/hyperparams.hpp"
#include "fedmm/problem.hpp"

namespace fedmm {

/// Algorithm state: the iterate triple plus accounting.
struct ParamState {
  Vec x, y, z;
  std::int64_t t = 0;
  std::int64_t samples_used = 0;
};

struct TraceRecord {
  std::int64_t round = 0;
  std::int64_t samples_used = 0;
  double wall_ms = 0;  // cumulative; reported in summaries, never in trace CSVs
  std::vector<double> metrics;
};

struct RunResult {
  std::vector<TraceRecord> trace;
  ParamState final_state;
};

struct RunHooks {
  // Metric row evaluated at emit rounds (t = 0, every metrics_every, final).
  std::function<std::vector<double>(const ParamState&)> metrics;
  // Called after every round, and once on the initial state.
  std::function<void(const ParamState&)> on_round;
};

enum class ClientExecution { serial, parallel };

struct LocalStepRecord {
  Vec x, y;    // query point of the step
  Vec gx, gy;  // stochastic gradient used
};

struct LocalUpdateResult {
  int client_id = 0;
  Vec x_final, y_final;
  std::int64_t samples = 0;
  std::optional<std::vector<LocalStepRecord>> trajectory;  // diagnostic mode only
};

/// K sequential local SGDA steps from (x_t, y_t): x unprojected, y projected
/// every step. The smoothing term p(x - z) is a server-side correction and is
/// deliberately absent here.
inline LocalUpdateResult local_updates(const ProblemSpec& p, const ClientShard& client,
                                       const Vec& x_t, const Vec& y_t, const HyperParams& hp,
                                       int batch, const RngStream& client_stream,
                                       bool record_trajectory = false) {
  p.check_point(x_t, y_t);
  Vec x = x_t, y = y_t;
  LocalUpdateResult out;
  out.client_id = client.client_id;
  if (record_trajectory) out.trajectory.emplace();
  for (int k = 0; k < hp.K; ++k) {
    RngStream step = client_stream.derive(k);
    GradPair g;
    try {
      g = client.oracle(x, y, batch, step);
    } catch (const std::exception& e) {
      throw Error("client " + std::to_string(client.client_id) + " oracle failed at local step " +
                  std::to_string(k) + ": " + e.what());
    }
    if (!g.gx.allFinite() || !g.gy.allFinite())
      throw Error("client " + std::to_string(client.client_id) +
                  " oracle returned non-finite gradient at local step " + std::to_string(k));
    if (record_trajectory) out.trajectory->push_back({x, y, g.gx, g.gy});
    x = x - hp.eta_x_local * g.gx;
    y = project(p.constraint, y + hp.eta_y_local * g.gy);
  }
  out.x_final = std::move(x);
  out.y_final = std::move(y);
  out.samples = static_cast<std::int64_t>(hp.K) * batch;
  return out;
}

namespace detail {

inline RngStream client_stream(const RngStream& run_stream, std::int64_t t, int client_id) {
  return run_stream.derive(t).derive(kClientTag).derive(client_id);
}

}  // namespace detail

/// One communication round of FESS-GDA: sample S_t, run local updates on the
/// sampled clients, aggregate in fixed ascending client order, apply the
/// smoothing correction and the anchor update. The x/y/z server updates are
/// computed in convex-combination form, (1-eta_g)*v + eta_g*vbar, which is the
/// displayed update regrouped and makes the eta_g = 1 reductions exact in
/// floating point.
inline ParamState fessgda_round(const ProblemSpec& p, const ParamState& state,
                                const HyperParams& hp, const FederationConfig& fed,
                                const RngStream& run_stream,
                                ClientExecution exec = ClientExecution::serial,
                                std::vector<LocalUpdateResult>* local_out = nullptr) {
  fed.validate();
  if (fed.clients != p.num_clients())
    throw ConfigError({"federation.clients (" + std::to_string(fed.clients) +
                       ") does not match the problem's client count (" +
                       std::to_string(p.num_clients()) + ")"});
  const ParticipationSample sample = sample_participants(fed, state.t, run_stream);
  const bool record = local_out != nullptr;

  std::vector<LocalUpdateResult> results(sample.client_ids.size());
  auto run_client = [&](std::size_t idx) {
    const int cid = sample.client_ids[idx];
    results[idx] = local_updates(p, p.clients[static_cast<std::size_t>(cid)], state.x, state.y, hp,
                                 fed.batch_size, detail::client_stream(run_stream, state.t, cid),
                                 record);
  };
  if (exec == ClientExecution::parallel && sample.client_ids.size() > 1) {
    std::vector<std::future<void>> futs;
    futs.reserve(sample.client_ids.size());
    for (std::size_t i = 0; i < sample.client_ids.size(); ++i)
      futs.push_back(std::async(std::launch::async, run_client, i));
    for (auto& f : futs) f.get();
  } else {
    for (std::size_t i = 0; i < sample.client_ids.size(); ++i) run_client(i);
  }

  // Serial fold in ascending client id order; results are already ordered.
  Vec xbar = results.front().x_final;
  Vec ybar = results.front().y_final;
  for (std::size_t i = 1; i < results.size(); ++i) {
    xbar += results[i].x_final;
    ybar += results[i].y_final;
  }
  xbar /= static_cast<double>(results.size());
  ybar /= static_cast<double>(results.size());

  ParamState next;
  const double cx = 1.0 - hp.eta_x_global;
  const double cy = 1.0 - hp.eta_y_global;
  const double smooth_coef = hp.eta_x_local * hp.eta_x_global * static_cast<double>(hp.K) * hp.p;
  next.x = cx * state.x + hp.eta_x_global * xbar - smooth_coef * (state.x - state.z);
  next.y = project(p.constraint, cy * state.y + hp.eta_y_global * ybar);
  next.z = (1.0 - hp.beta) * state.z + hp.beta * next.x;
  check_finite(next.x, "fessgda_round x-update", state.t);
  check_finite(next.y, "fessgda_round y-update", state.t);
  check_finite(next.z, "fessgda_round z-update", state.t);
  next.t = state.t + 1;
  next.samples_used =
      state.samples_used + static_cast<std::int64_t>(results.size()) * hp.K * fed.batch_size;
  if (local_out) *local_out = std::move(results);
  return next;
}

namespace detail {

template <typename StepFn>
RunResult run_loop(const ProblemSpec& p, ParamState state, const RunConfig& cfg,
                   const RunHooks& hooks, StepFn&& step) {
  cfg.validate();
  p.check_point(state.x, state.y);
  state.y = project(p.constraint, state.y);
  const auto t0 = std::chrono::steady_clock::now();
  RunResult out;
  auto emit = [&](const ParamState& s) {
    TraceRecord rec;
    rec.round = s.t;
    rec.samples_used = s.samples_used;
    rec.wall_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (hooks.metrics) rec.metrics = hooks.metrics(s);
    out.trace.push_back(std::move(rec));
  };
  if (hooks.on_round) hooks.on_round(state);
  emit(state);
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    state = step(state);
    if (hooks.on_round) hooks.on_round(state);
    if (state.t % cfg.metrics_every == 0 || state.t == cfg.rounds) emit(state);
  }
  out.final_state = std::move(state);
  return out;
}

}  // namespace detail

/// Full FESS-GDA run: T rounds from `init`, trace emitted at round 0, every
/// metrics_every rounds and at the end.
inline RunResult run_fessgda(const ProblemSpec& p, const ParamState& init, const HyperParams& hp,
                             const FederationConfig& fed, const RunConfig& cfg,
                             const RunHooks& hooks = {},
                             ClientExecution exec = ClientExecution::serial) {
  hp.validate();
  const RngStream run_stream{cfg.seed};
  return detail::run_loop(p, init, cfg, hooks, [&](const ParamState& s) {
    return fessgda_round(p, s, hp, fed, run_stream, exec);
  });
}

/// Centralized deterministic smoothed GDA (the M = m = 1, K = 1, sigma = 0
/// reduction), implemented directly on full gradients. The x update is applied
/// in two stages and z as a convex combination so the reduction from the
/// federated path is bit-exact.
inline RunResult run_smoothed_gda(const ProblemSpec& p, const ParamState& init, double eta_x,
                                  double eta_y, double beta, double p_smooth, std::int64_t T,
                                  const RunHooks& hooks = {}, std::int64_t metrics_every = 1,
                                  std::uint64_t seed = 0) {
  if (!(eta_x > 0) || !(eta_y > 0)) throw ConfigError({"smoothed_gda: step sizes must be > 0"});
  if (!(beta > 0) || beta > 1) throw ConfigError({"smoothed_gda: beta must lie in (0, 1]"});
  if (p_smooth < 0) throw ConfigError({"smoothed_gda: p must be >= 0"});
  RunConfig cfg;
  cfg.seed = seed;
  cfg.rounds = T;
  cfg.metrics_every = metrics_every;
  const double smooth_coef = eta_x * p_smooth;
  return detail::run_loop(p, init, cfg, hooks, [&](const ParamState& s) {
    const GradPair g = full_gradient(p, s.x, s.y);
    ParamState next;
    next.x = s.x - eta_x * g.gx;
    next.x = next.x - smooth_coef * (s.x - s.z);
    next.y = project(p.constraint, s.y + eta_y * g.gy);
    next.z = (1.0 - beta) * s.z + beta * next.x;
    check_finite(next.x, "smoothed_gda x-update", s.t);
    check_finite(next.y, "smoothed_gda y-update", s.t);
    next.t = s.t + 1;
    next.samples_used = s.samples_used + 1;  // one full-gradient evaluation per round
    return next;
  });
}

/// Local SGDA baseline: FESS-GDA with the smoothing off and unit global rates.
inline RunResult run_local_sgda_baseline(const ProblemSpec& p, const ParamState& init,
                                         HyperParams hp, const FederationConfig& fed,
                                         const RunConfig& cfg, const RunHooks& hooks = {},
                                         ClientExecution exec = ClientExecution::serial) {
  hp.p = 0.0;
  hp.eta_x_global = 1.0;
  hp.eta_y_global = 1.0;
  return run_fessgda(p, init, hp, fed, cfg, hooks, exec);
}

/// FSGDA baseline: smoothing off, global rates kept.
inline RunResult run_fsgda_baseline(const ProblemSpec& p, const ParamState& init, HyperParams hp,
                                    const FederationConfig& fed, const RunConfig& cfg,
                                    const RunHooks& hooks = {},
                                    ClientExecution exec = ClientExecution::serial) {
  hp.p = 0.0;
  return run_fessgda(p, init, hp, fed, cfg, hooks, exec);
}

/// Concave-case regularization wrapper: optimizes
/// f(x,y) - eps/(4 D(Y)) |y - y0|^2, which is eps/(2 D(Y))-strongly concave
/// and (l + eps/(2 D(Y)))-smooth. Requires a bounded Y.
inline ProblemSpec ncc_regularize(const ProblemSpec& p, double epsilon, const Vec& y0) {
  const auto D = diameter(p.constraint);
  if (!D) throw ConfigError({"ncc_regularize requires a bounded constraint set (finite D(Y))"});
  if (!(epsilon > 0) || epsilon > 2.0 * p.constants.l * (*D))
    throw ConfigError({"ncc_regularize requires 0 < epsilon <= 2 * l * D(Y)"});
  if (y0.size() != p.dim_y) throw DimensionError("ncc_regularize y0", y0.size(), p.dim_y);

  const double reg = epsilon / (2.0 * (*D));  // strong-concavity modulus
  ProblemSpec out = p;
  out.family = "ncc_regularized(" + p.family + ")";
  out.params = {{"base", p.params}, {"epsilon", epsilon}};
  for (std::size_t i = 0; i < out.clients.size(); ++i) {
    const ClientShard base = p.clients[i];
    auto& shard = out.clients[i];
    shard.oracle = [base, reg, y0](const Vec& x, const Vec& y, int batch, RngStream& rng) {
      GradPair g = base.oracle(x, y, batch, rng);
      g.gy -= reg * (y - y0);
      return g;
    };
    shard.full_oracle = [base, reg, y0](const Vec& x, const Vec& y) {
      GradPair g = base.full_oracle(x, y);
      g.gy -= reg * (y - y0);
      return g;
    };
    shard.full_value = [base, reg, y0](const Vec& x, const Vec& y) {
      return base.full_value(x, y) - 0.5 * reg * (y - y0).squaredNorm();
    };
  }
  out.constants.mu = reg;
  out.constants.l = p.constants.l + reg;
  // The wrapped objective has its own primal function; analytic oracles of the
  // base problem no longer apply.
  out.closed_form = ClosedFormOracles{};
  out.closed_form.target_x = p.closed_form.target_x;
  out.closed_form.target_y = p.closed_form.target_y;
  return out;
}

// ---------------------------------------------------------------------------
// Federation diagnostics: client drift and sampling variance.

struct DriftStats {
  double e_x_norm = 0;  // |mean client drift| in x (deterministic part)
  double e_y_norm = 0;
  double d_x_hat = 0;  // resampling estimate of the aggregated-direction MSE
  double d_y_hat = 0;
  int resamples = 0;
};

/// Drift and variance diagnostics for one round. The e-terms need local
/// trajectories, so the round must have run in diagnostic (recording) mode;
/// the d-terms are estimated by replaying the local phase with fresh streams.
inline DriftStats aggregate_drift_diagnostics(const ProblemSpec& p, const ParamState& state,
                                              const ParticipationSample& sample,
                                              const std::vector<LocalUpdateResult>& local_results,
                                              const HyperParams& hp, const FederationConfig& fed,
                                              const RngStream& run_stream, int resamples = 32) {
  DriftStats out;
  if (local_results.empty()) throw Error("aggregate_drift_diagnostics: no local results");
  if (local_results.size() != sample.client_ids.size())
    throw Error("aggregate_drift_diagnostics: local results do not match the participation sample");
  Vec ex = Vec::Zero(p.dim_x), ey = Vec::Zero(p.dim_y);
  std::int64_t terms = 0;
  for (const auto& r : local_results) {
    if (!r.trajectory)
      throw Error("aggregate_drift_diagnostics: diagnostic mode disabled, local trajectories were not retained");
    const auto& client = p.clients[static_cast<std::size_t>(r.client_id)];
    const GradPair at_anchor = client.full_oracle(state.x, state.y);
    for (const auto& step : *r.trajectory) {
      const GradPair at_local = client.full_oracle(step.x, step.y);
      ex += at_anchor.gx - at_local.gx;
      ey += at_anchor.gy - at_local.gy;
      ++terms;
    }
  }
  ex /= static_cast<double>(terms);
  ey /= static_cast<double>(terms);
  out.e_x_norm = ex.norm();
  out.e_y_norm = ey.norm();

  const GradPair mean = full_gradient(p, state.x, state.y);
  double dx = 0, dy = 0;
  for (int r = 0; r < resamples; ++r) {
    const RngStream replay = run_stream.derive(state.t).derive(detail::kResampleTag).derive(r);
    const ParticipationSample s = sample_participants(fed, state.t, replay);
    Vec ux = Vec::Zero(p.dim_x), uy = Vec::Zero(p.dim_y);
    std::int64_t n = 0;
    for (const int cid : s.client_ids) {
      const auto res = local_updates(p, p.clients[static_cast<std::size_t>(cid)], state.x, state.y,
                                     hp, fed.batch_size, detail::client_stream(replay, state.t, cid),
                                     true);
      for (const auto& step : *res.trajectory) {
        ux += step.gx;
        uy += step.gy;
        ++n;
      }
    }
    ux /= static_cast<double>(n);
    uy /= static_cast<double>(n);
    dx += (mean.gx - ux).squaredNorm();
    dy += (mean.gy - uy).squaredNorm();
  }
  out.d_x_hat = dx / resamples;
  out.d_y_hat = dy / resamples;
  out.resamples = resamples;
  return out;
}

/// Empirical variance of the aggregated stochastic direction u_x at a fixed
/// state: the mean squared deviation around the resample mean. Used for the
/// linear-speedup (variance ~ c/m) checks.
inline double direction_variance_x(const ProblemSpec& p, const Vec& x, const Vec& y,
                                   const FederationConfig& fed, int resamples,
                                   const RngStream& stream) {
  std::vector<Vec> draws;
  draws.reserve(static_cast<std::size_t>(resamples));
  for (int r = 0; r < resamples; ++r) {
    const RngStream rs = stream.derive(r);
    const ParticipationSample s = sample_participants(fed, 0, rs);
    Vec ux = Vec::Zero(p.dim_x);
    std::int64_t n = 0;
    for (const int cid : s.client_ids) {
      RngStream cs = detail::client_stream(rs, 0, cid);
      for (int k = 0; k < fed.local_steps; ++k) {
        RngStream step = cs.derive(k);
        ux += p.clients[static_cast<std::size_t>(cid)].oracle(x, y, fed.batch_size, step).gx;
        ++n;
      }
    }
    draws.push_back(ux / static_cast<double>(n));
  }
  Vec mean = Vec::Zero(p.dim_x);
  for (const auto& d : draws) mean += d;
  mean /= static_cast<double>(draws.size());
  double var = 0;
  for (const auto& d : draws) var += (d - mean).squaredNorm();
  return var / (static_cast<double>(draws.size()) - 1.0);
}

}  // namespace fedmm
