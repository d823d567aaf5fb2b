#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <future>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "fedmm/diagnostics.hpp"
#include "fedmm/io.hpp"
#include "fedmm/problems/serialize.hpp"

namespace fedmm {

enum class Algorithm { fessgda, smoothed_gda, local_sgda, fsgda };

inline const char* to_string(Algorithm a) {
  switch (a) {
    case Algorithm::fessgda: return "fessgda";
    case Algorithm::smoothed_gda: return "smoothed_gda";
    case Algorithm::local_sgda: return "local_sgda";
    case Algorithm::fsgda: return "fsgda";
  }
  return "?";
}

inline std::optional<Algorithm> algorithm_from_string(const std::string& s) {
  if (s == "fessgda") return Algorithm::fessgda;
  if (s == "smoothed_gda") return Algorithm::smoothed_gda;
  if (s == "local_sgda") return Algorithm::local_sgda;
  if (s == "fsgda") return Algorithm::fsgda;
  return std::nullopt;
}

/// A fully validated, declarative experiment: problem + algorithm +
/// materialized hyperparameters + federation shape + run plan.
struct ExperimentConfig {
  std::string experiment_id;
  nlohmann::json problem_json;
  Algorithm algorithm = Algorithm::fessgda;
  FederationConfig federation;
  RunConfig run;
  std::vector<std::uint64_t> seeds;
  std::vector<std::string> metrics;
  HyperParams hyper;  // materialized (presets already expanded)
  std::optional<PresetSetting> preset;
  std::optional<double> target_eps;
  std::optional<Vec> init_x, init_y, init_z;
  std::vector<std::string> warnings;
  nlohmann::json raw;
};

inline nlohmann::json hyper_to_json(const HyperParams& hp) {
  nlohmann::json j{{"eta_x_local", hp.eta_x_local},   {"eta_y_local", hp.eta_y_local},
                   {"eta_x_global", hp.eta_x_global}, {"eta_y_global", hp.eta_y_global},
                   {"beta", hp.beta},                 {"p", hp.p},
                   {"K", hp.K},                       {"eta_x", hp.eta_x()},
                   {"eta_y", hp.eta_y()}};
  j["provenance"] = {{"kind", hp.provenance.kind == HyperParams::Provenance::Kind::preset
                                  ? "preset"
                                  : "manual"},
                     {"setting", hp.provenance.setting},
                     {"notes", hp.provenance.notes}};
  return j;
}

namespace detail {

inline std::optional<Vec> vec_from_json(const nlohmann::json& j, const std::string& key,
                                        std::vector<std::string>& issues) {
  if (!j.contains(key)) return std::nullopt;
  try {
    const auto v = j.at(key).get<std::vector<double>>();
    return Eigen::Map<const Vec>(v.data(), static_cast<Eigen::Index>(v.size())).eval();
  } catch (const nlohmann::json::exception&) {
    issues.push_back("init." + key + " must be an array of numbers");
    return std::nullopt;
  }
}

// Delta = V(init) - Phi*, needed by the stochastic eta_x preset rule.
inline std::optional<double> preset_delta_hint(const ProblemSpec& p, const ParamState& init,
                                               std::vector<std::string>& notes) {
  if (!p.constants.phi_star) return std::nullopt;
  try {
    InnerSolverConfig cfg;
    cfg.max_iters = 20000;
    cfg.tol = 1e-6;
    const double v0 = potential(p, init, 2.0 * p.constants.l, cfg).v;
    notes.push_back("preset delta estimated as V(init) - Phi* = " +
                    fmt_g17(std::max(v0 - *p.constants.phi_star, 1e-6)));
    return std::max(v0 - *p.constants.phi_star, 1e-6);
  } catch (const std::exception&) {
    return std::nullopt;
  }
}

}  // namespace detail

/// Validate and materialize an experiment config. Collects every offending
/// field instead of stopping at the first.
inline ExperimentConfig validate_config(const nlohmann::json& j) {
  std::vector<std::string> issues;
  ExperimentConfig cfg;
  cfg.raw = j;
  if (!j.is_object()) throw ConfigError({"experiment config must be a JSON object"});

  cfg.experiment_id = j.value("experiment_id", std::string("experiment"));

  // Problem.
  std::optional<ProblemSpec> problem;
  if (!j.contains("problem")) {
    issues.push_back("problem is required");
  } else {
    cfg.problem_json = j.at("problem");
    try {
      problem = problem_from_json(cfg.problem_json);
    } catch (const ConfigError& e) {
      issues.insert(issues.end(), e.issues.begin(), e.issues.end());
    } catch (const std::exception& e) {
      issues.push_back(std::string("problem: ") + e.what());
    }
  }

  // Algorithm.
  const std::string alg = j.value("algorithm", std::string("fessgda"));
  if (auto a = algorithm_from_string(alg)) {
    cfg.algorithm = *a;
  } else {
    issues.push_back("algorithm must be one of fessgda|smoothed_gda|local_sgda|fsgda, got '" +
                     alg + "'");
  }

  // Federation.
  if (j.contains("federation")) {
    const auto& jf = j.at("federation");
    cfg.federation.clients = jf.value("clients", 1);
    cfg.federation.participants = jf.value("participants", cfg.federation.clients);
    cfg.federation.local_steps = jf.value("local_steps", 1);
    cfg.federation.batch_size = jf.value("batch_size", 100);
  } else {
    issues.push_back("federation is required");
  }
  try {
    cfg.federation.validate();
  } catch (const ConfigError& e) {
    issues.insert(issues.end(), e.issues.begin(), e.issues.end());
  }
  if (problem && cfg.federation.clients != problem->num_clients())
    issues.push_back("federation.clients (" + std::to_string(cfg.federation.clients) +
                     ") does not match problem.clients (" + std::to_string(problem->num_clients()) +
                     ")");

  // Run plan.
  if (j.contains("run")) {
    const auto& jr = j.at("run");
    cfg.run.rounds = jr.value("rounds", std::int64_t{1});
    cfg.run.metrics_every = jr.value("metrics_every", std::int64_t{1});
    cfg.run.output_dir = jr.value("output_dir", std::string("out"));
  } else {
    issues.push_back("run is required");
  }
  try {
    cfg.run.validate();
  } catch (const ConfigError& e) {
    issues.insert(issues.end(), e.issues.begin(), e.issues.end());
  }

  // Seeds.
  if (j.contains("seeds")) {
    try {
      cfg.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
    } catch (const nlohmann::json::exception&) {
      issues.push_back("seeds must be an array of unsigned integers");
    }
  }
  if (cfg.seeds.empty()) issues.push_back("seeds must be a nonempty array");

  // Metrics.
  if (j.contains("metrics")) {
    try {
      cfg.metrics = j.at("metrics").get<std::vector<std::string>>();
    } catch (const nlohmann::json::exception&) {
      issues.push_back("metrics must be an array of strings");
    }
  }
  if (cfg.metrics.empty()) cfg.metrics = {"grad_x_norm", "grad_map_y_norm", "x_minus_z_norm"};
  for (const auto& m : cfg.metrics)
    if (!is_metric(m)) issues.push_back("unknown metric '" + m + "' (not in the diagnostics registry)");

  // Initial point.
  if (j.contains("init") && problem) {
    const auto& ji = j.at("init");
    cfg.init_x = detail::vec_from_json(ji, "x", issues);
    cfg.init_y = detail::vec_from_json(ji, "y", issues);
    cfg.init_z = detail::vec_from_json(ji, "z", issues);
    if (cfg.init_x && cfg.init_x->size() != problem->dim_x)
      issues.push_back("init.x has dimension " + std::to_string(cfg.init_x->size()) +
                       ", problem wants " + std::to_string(problem->dim_x));
    if (cfg.init_y && cfg.init_y->size() != problem->dim_y)
      issues.push_back("init.y has dimension " + std::to_string(cfg.init_y->size()) +
                       ", problem wants " + std::to_string(problem->dim_y));
    if (cfg.init_z && cfg.init_z->size() != problem->dim_x)
      issues.push_back("init.z has dimension " + std::to_string(cfg.init_z->size()) +
                       ", problem wants " + std::to_string(problem->dim_x));
  }

  // Hyperparameters: manual fields or a preset tag, expanded here so the
  // materialized values are logged.
  cfg.hyper.K = cfg.federation.local_steps;
  if (!j.contains("hyper")) {
    issues.push_back("hyper is required (manual values or a preset tag)");
  } else {
    const auto& jh = j.at("hyper");
    if (jh.contains("K") && jh.value("K", 1) != cfg.federation.local_steps)
      issues.push_back("hyper.K must match federation.local_steps");
    if (jh.contains("preset")) {
      const std::string tag = jh.value("preset", std::string());
      const auto setting = preset_from_string(tag);
      if (!setting) {
        issues.push_back("unknown preset '" + tag +
                         "' (expected nc_pl|nc_1pc|nc_c|pointwise_max|pl_pl)");
      } else if (problem) {
        cfg.preset = *setting;
        if (jh.contains("target_eps")) cfg.target_eps = jh.value("target_eps", 0.0);
        try {
          ParamState init;
          init.x = cfg.init_x ? *cfg.init_x : Vec::Zero(problem->dim_x);
          init.y = project(problem->constraint,
                           cfg.init_y ? *cfg.init_y : Vec::Zero(problem->dim_y));
          init.z = cfg.init_z ? *cfg.init_z : init.x;
          std::optional<double> delta;
          if (problem->constants.sigma > 0)
            delta = detail::preset_delta_hint(*problem, init, cfg.warnings);
          cfg.hyper = preset_hyperparams(*setting, problem->constants, cfg.federation,
                                         cfg.run.rounds, cfg.target_eps, delta);
        } catch (const ConfigError& e) {
          issues.insert(issues.end(), e.issues.begin(), e.issues.end());
        }
      }
    } else {
      HyperParams hp;
      hp.K = cfg.federation.local_steps;
      if (jh.contains("eta_local")) {
        hp.eta_x_local = hp.eta_y_local = jh.value("eta_local", 0.1);
      } else {
        hp.eta_x_local = jh.value("eta_x_local", 0.1);
        hp.eta_y_local = jh.value("eta_y_local", 0.1);
      }
      if (jh.contains("eta_global")) {
        hp.eta_x_global = hp.eta_y_global = jh.value("eta_global", 1.0);
      } else {
        hp.eta_x_global = jh.value("eta_x_global", 1.0);
        hp.eta_y_global = jh.value("eta_y_global", 1.0);
      }
      hp.beta = jh.value("beta", 0.5);
      hp.p = jh.value("p", 0.0);
      hp.provenance.kind = HyperParams::Provenance::Kind::manual;
      try {
        hp.validate();
      } catch (const ConfigError& e) {
        issues.insert(issues.end(), e.issues.begin(), e.issues.end());
      }
      cfg.hyper = hp;
      if (problem) {
        const auto warn = theorem_cap_warnings(hp, problem->constants);
        cfg.warnings.insert(cfg.warnings.end(), warn.begin(), warn.end());
      }
    }
  }

  if (!issues.empty()) throw ConfigError(std::move(issues));
  return cfg;
}

inline ExperimentConfig validate_config_text(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError({std::string("JSON parse error: ") + e.what()});
  }
  return validate_config(j);
}

// ---------------------------------------------------------------------------
// Running.

struct SeedOutcome {
  std::uint64_t seed = 0;
  std::string status = "ok";  // ok | aborted_nonfinite | error
  std::string message;
  double wall_ms = 0;
  std::vector<TraceRecord> trace;
};

struct ExperimentResult {
  std::filesystem::path dir;  // empty when artifacts were not written
  ExperimentConfig cfg;
  std::vector<SeedOutcome> seeds;
  std::vector<std::int64_t> agg_round, agg_samples;
  std::vector<std::vector<double>> agg_mean, agg_std;  // [row][metric]

  // Mean over completed seeds of the final value of `metric`; NaN if no seed finished.
  double final_mean(const std::string& metric) const {
    for (std::size_t k = 0; k < cfg.metrics.size(); ++k) {
      if (cfg.metrics[k] != metric) continue;
      if (agg_mean.empty()) return std::numeric_limits<double>::quiet_NaN();
      return agg_mean.back()[k];
    }
    throw ConfigError({"metric '" + metric + "' was not recorded by this experiment"});
  }
};

namespace detail {

inline ParamState initial_state(const ProblemSpec& p, const ExperimentConfig& cfg) {
  ParamState s;
  s.x = cfg.init_x ? *cfg.init_x : Vec::Zero(p.dim_x);
  s.y = project(p.constraint, cfg.init_y ? *cfg.init_y : Vec::Zero(p.dim_y));
  s.z = cfg.init_z ? *cfg.init_z : s.x;
  return s;
}

inline SeedOutcome run_one_seed(const ProblemSpec& base_problem, const ProblemSpec& run_problem,
                                const ExperimentConfig& cfg, std::uint64_t seed) {
  SeedOutcome out;
  out.seed = seed;
  MetricContext mctx;
  mctx.problem = &base_problem;  // metrics always refer to the original objective
  mctx.p_smooth = cfg.hyper.p;
  mctx.eta_y_K = cfg.hyper.eta_y() * cfg.hyper.K;
  RunHooks hooks;
  hooks.metrics = [&](const ParamState& s) {
    std::vector<double> row;
    row.reserve(cfg.metrics.size());
    for (const auto& m : cfg.metrics) row.push_back(eval_metric(m, mctx, s));
    return row;
  };
  RunConfig rc = cfg.run;
  rc.seed = seed;
  const ParamState init = initial_state(run_problem, cfg);
  try {
    RunResult r;
    switch (cfg.algorithm) {
      case Algorithm::fessgda:
        r = run_fessgda(run_problem, init, cfg.hyper, cfg.federation, rc, hooks);
        break;
      case Algorithm::local_sgda:
        r = run_local_sgda_baseline(run_problem, init, cfg.hyper, cfg.federation, rc, hooks);
        break;
      case Algorithm::fsgda:
        r = run_fsgda_baseline(run_problem, init, cfg.hyper, cfg.federation, rc, hooks);
        break;
      case Algorithm::smoothed_gda:
        r = run_smoothed_gda(run_problem, init, cfg.hyper.eta_x(), cfg.hyper.eta_y(),
                             cfg.hyper.beta, cfg.hyper.p, rc.rounds, hooks, rc.metrics_every,
                             seed);
        break;
    }
    out.trace = std::move(r.trace);
    out.wall_ms = out.trace.empty() ? 0 : out.trace.back().wall_ms;
  } catch (const NonFiniteError& e) {
    out.status = "aborted_nonfinite";
    out.message = e.what();
  } catch (const std::exception& e) {
    out.status = "error";
    out.message = e.what();
  }
  return out;
}

inline std::string trace_csv(const ExperimentConfig& cfg, const std::vector<TraceRecord>& trace) {
  std::string s = "round,samples_used";
  for (const auto& m : cfg.metrics) s += "," + m;
  s += "\n";
  for (const auto& rec : trace) {
    s += std::to_string(rec.round) + "," + std::to_string(rec.samples_used);
    for (const double v : rec.metrics) s += "," + fmt_g17(v);
    s += "\n";
  }
  return s;
}

}  // namespace detail

inline std::filesystem::path output_root_or_default(const std::string& configured) {
  if (const char* env = std::getenv("FEDMM_OUTPUT_ROOT"); env && *env) return env;
  return configured.empty() ? "out" : configured;
}

/// Run every seed (in parallel), write per-seed traces, the cross-seed
/// aggregate, summary.json and one SVG per metric. Returns the in-memory
/// results as well.
inline ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_artifacts = true) {
  const ProblemSpec problem = problem_from_json(cfg.problem_json);
  // The nc_c preset optimizes the regularized objective; metrics stay on the
  // original one.
  ProblemSpec run_problem = problem;
  if (cfg.preset == PresetSetting::nc_c) {
    const ParamState init = detail::initial_state(problem, cfg);
    run_problem = ncc_regularize(problem, *cfg.target_eps, init.y);
  }

  ExperimentResult res;
  res.cfg = cfg;
  res.seeds.resize(cfg.seeds.size());
  {
    std::vector<std::future<SeedOutcome>> futs;
    futs.reserve(cfg.seeds.size());
    for (const auto seed : cfg.seeds)
      futs.push_back(std::async(std::launch::async, [&, seed] {
        return detail::run_one_seed(problem, run_problem, cfg, seed);
      }));
    for (std::size_t i = 0; i < futs.size(); ++i) res.seeds[i] = futs[i].get();
  }

  // Aggregate across completed seeds (identical round grids by construction).
  const std::size_t n_metrics = cfg.metrics.size();
  std::vector<const SeedOutcome*> done;
  for (const auto& s : res.seeds)
    if (s.status == "ok") done.push_back(&s);
  if (!done.empty()) {
    const std::size_t rows = done.front()->trace.size();
    for (const auto* s : done)
      if (s->trace.size() != rows) throw Error("internal: seed traces have differing round grids");
    res.agg_round.resize(rows);
    res.agg_samples.resize(rows);
    res.agg_mean.assign(rows, std::vector<double>(n_metrics, 0.0));
    res.agg_std.assign(rows, std::vector<double>(n_metrics, 0.0));
    for (std::size_t r = 0; r < rows; ++r) {
      res.agg_round[r] = done.front()->trace[r].round;
      res.agg_samples[r] = done.front()->trace[r].samples_used;
      for (std::size_t k = 0; k < n_metrics; ++k) {
        double mean = 0;
        for (const auto* s : done) mean += s->trace[r].metrics[k];
        mean /= static_cast<double>(done.size());
        double var = 0;
        for (const auto* s : done) {
          const double d = s->trace[r].metrics[k] - mean;
          var += d * d;
        }
        res.agg_mean[r][k] = mean;
        res.agg_std[r][k] = std::sqrt(var / static_cast<double>(done.size()));
      }
    }
  }

  if (!write_artifacts) return res;

  const std::filesystem::path dir =
      output_root_or_default(cfg.run.output_dir) / cfg.experiment_id;
  std::filesystem::create_directories(dir);
  res.dir = dir;

  for (const auto& s : res.seeds)
    if (s.status == "ok")
      write_atomic(dir / ("trace_seed" + std::to_string(s.seed) + ".csv"),
                   detail::trace_csv(cfg, s.trace));
  {
    std::string agg = "round,samples_used";
    for (const auto& m : cfg.metrics) agg += "," + m + "_mean," + m + "_std";
    agg += "\n";
    for (std::size_t r = 0; r < res.agg_round.size(); ++r) {
      agg += std::to_string(res.agg_round[r]) + "," + std::to_string(res.agg_samples[r]);
      for (std::size_t k = 0; k < n_metrics; ++k)
        agg += "," + fmt_g17(res.agg_mean[r][k]) + "," + fmt_g17(res.agg_std[r][k]);
      agg += "\n";
    }
    write_atomic(dir / "aggregate.csv", agg);
  }
  {
    nlohmann::json summary;
    summary["experiment_id"] = cfg.experiment_id;
    summary["algorithm"] = to_string(cfg.algorithm);
    summary["config"] = cfg.raw;
    summary["materialized_hyper"] = hyper_to_json(cfg.hyper);
    summary["warnings"] = cfg.warnings;
    summary["metrics"] = cfg.metrics;
    summary["problem"] = {{"family", problem.family},
                          {"params", problem.params},
                          {"constants",
                           {{"l", problem.constants.l},
                            {"sigma", problem.constants.sigma},
                            {"sigma_G", problem.constants.sigma_G},
                            {"estimated", problem.constants.estimated}}}};
    if (problem.constants.mu) summary["problem"]["constants"]["mu"] = *problem.constants.mu;
    if (problem.constants.phi_star)
      summary["problem"]["constants"]["phi_star"] = *problem.constants.phi_star;
    summary["seeds"] = nlohmann::json::array();
    for (const auto& s : res.seeds) {
      nlohmann::json js{{"seed", s.seed}, {"status", s.status}, {"wall_ms", s.wall_ms}};
      if (!s.message.empty()) js["message"] = s.message;
      if (!s.trace.empty()) {
        nlohmann::json fin, best;
        for (std::size_t k = 0; k < n_metrics; ++k) {
          fin[cfg.metrics[k]] = s.trace.back().metrics[k];
          double b = s.trace.front().metrics[k];
          for (const auto& rec : s.trace) b = std::min(b, rec.metrics[k]);
          best[cfg.metrics[k]] = b;
        }
        js["final"] = fin;
        js["best"] = best;
      }
      summary["seeds"].push_back(js);
    }
    if (!res.agg_mean.empty()) {
      nlohmann::json fin;
      for (std::size_t k = 0; k < n_metrics; ++k)
        fin[cfg.metrics[k]] = {{"mean", res.agg_mean.back()[k]},
                               {"std", res.agg_std.back()[k]}};
      summary["aggregate_final"] = fin;
    }
    write_atomic(dir / "summary.json", summary.dump(2) + "\n");
  }
  for (std::size_t k = 0; k < n_metrics; ++k) {
    std::vector<PlotSeries> series;
    for (const auto& s : res.seeds) {
      if (s.status != "ok") continue;
      PlotSeries ps;
      ps.label = "seed " + std::to_string(s.seed);
      for (const auto& rec : s.trace) {
        ps.x.push_back(static_cast<double>(rec.samples_used));
        ps.y.push_back(rec.metrics[k]);
      }
      series.push_back(std::move(ps));
    }
    if (!res.agg_mean.empty()) {
      PlotSeries mean;
      mean.label = "mean";
      for (std::size_t r = 0; r < res.agg_round.size(); ++r) {
        mean.x.push_back(static_cast<double>(res.agg_samples[r]));
        mean.y.push_back(res.agg_mean[r][k]);
      }
      series.insert(series.begin(), std::move(mean));
    }
    write_atomic(dir / ("plot_" + cfg.metrics[k] + ".svg"),
                 render_svg_logy(series, cfg.experiment_id + " : " + cfg.metrics[k],
                                 "samples per client", cfg.metrics[k]));
  }
  return res;
}

// ---------------------------------------------------------------------------
// Learning-rate grid tuning (the per-algorithm best-cell protocol).

struct GridCellResult {
  double eta_local = 0, eta_global = 0;
  double final_metric = std::numeric_limits<double>::quiet_NaN();
  ExperimentResult result;
};

struct GridOutcome {
  std::vector<GridCellResult> cells;
  int best_index = -1;  // -1 when no cell finished
  const GridCellResult& best() const {
    if (best_index < 0) throw Error("grid: no cell produced a finite result");
    return cells[static_cast<std::size_t>(best_index)];
  }
};

/// Run the local x global learning-rate cross product and pick the cell with
/// the best (lowest) final mean of `metric`. local_sgda forces unit global
/// rates, so duplicate cells are skipped.
inline GridOutcome run_lr_grid(const ExperimentConfig& base, const std::vector<double>& locals,
                               const std::vector<double>& globals, const std::string& metric,
                               bool write_artifacts = true) {
  GridOutcome out;
  std::set<std::pair<double, double>> seen;
  for (const double lr : locals) {
    for (const double gr : globals) {
      const double eff_g = base.algorithm == Algorithm::local_sgda ? 1.0 : gr;
      if (!seen.insert({lr, eff_g}).second) continue;
      ExperimentConfig cfg = base;
      cfg.hyper.eta_x_local = cfg.hyper.eta_y_local = lr;
      cfg.hyper.eta_x_global = cfg.hyper.eta_y_global = eff_g;
      cfg.experiment_id =
          base.experiment_id + "_lr" + fmt_g17(lr) + "_g" + fmt_g17(eff_g);
      GridCellResult cell;
      cell.eta_local = lr;
      cell.eta_global = eff_g;
      cell.result = run_experiment(cfg, write_artifacts);
      cell.final_metric = cell.result.final_mean(metric);
      out.cells.push_back(std::move(cell));
    }
  }
  for (std::size_t i = 0; i < out.cells.size(); ++i) {
    const double v = out.cells[i].final_metric;
    if (!std::isfinite(v)) continue;
    if (out.best_index < 0 ||
        v < out.cells[static_cast<std::size_t>(out.best_index)].final_metric)
      out.best_index = static_cast<int>(i);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Comparison across algorithms on a shared problem and budget.

struct CompareEntry {
  std::string label;
  double final_mean = 0;
  std::vector<double> samples, mean;
};

struct CompareResult {
  std::filesystem::path dir;
  std::vector<CompareEntry> ranking;  // sorted ascending by final mean
};

inline CompareResult compare_experiments(const std::vector<ExperimentConfig>& cfgs,
                                         const std::string& metric,
                                         bool write_artifacts = true) {
  if (cfgs.empty()) throw ConfigError({"compare: need at least one experiment config"});
  std::vector<std::string> issues;
  for (std::size_t i = 1; i < cfgs.size(); ++i) {
    if (cfgs[i].problem_json != cfgs.front().problem_json)
      issues.push_back("compare: config " + std::to_string(i) +
                       " uses a different problem than config 0");
    if (cfgs[i].run.rounds != cfgs.front().run.rounds ||
        cfgs[i].run.metrics_every != cfgs.front().run.metrics_every)
      issues.push_back("compare: config " + std::to_string(i) + " has an incompatible round grid");
    const auto budget = [](const ExperimentConfig& c) {
      if (c.algorithm == Algorithm::smoothed_gda) return std::int64_t{1};
      return static_cast<std::int64_t>(c.federation.participants) * c.federation.local_steps *
             c.federation.batch_size;
    };
    if (budget(cfgs[i]) != budget(cfgs.front()))
      issues.push_back("compare: config " + std::to_string(i) +
                       " has an incompatible per-round sample budget");
  }
  for (const auto& c : cfgs) {
    bool found = false;
    for (const auto& m : c.metrics) found = found || m == metric;
    if (!found)
      issues.push_back("compare: experiment '" + c.experiment_id + "' does not record metric '" +
                       metric + "'");
  }
  if (!issues.empty()) throw ConfigError(std::move(issues));

  CompareResult out;
  std::vector<PlotSeries> series;
  for (const auto& cfg : cfgs) {
    const ExperimentResult r = run_experiment(cfg, write_artifacts);
    CompareEntry e;
    e.label = std::string(to_string(cfg.algorithm)) + ":" + cfg.experiment_id;
    std::size_t k = 0;
    while (cfg.metrics[k] != metric) ++k;
    for (std::size_t row = 0; row < r.agg_round.size(); ++row) {
      e.samples.push_back(static_cast<double>(r.agg_samples[row]));
      e.mean.push_back(r.agg_mean[row][k]);
    }
    e.final_mean = e.mean.empty() ? std::numeric_limits<double>::quiet_NaN() : e.mean.back();
    series.push_back({e.label, e.samples, e.mean});
    out.ranking.push_back(std::move(e));
  }
  std::stable_sort(out.ranking.begin(), out.ranking.end(),
                   [](const CompareEntry& a, const CompareEntry& b) {
                     return a.final_mean < b.final_mean;
                   });

  if (write_artifacts) {
    const std::filesystem::path dir =
        output_root_or_default(cfgs.front().run.output_dir) / ("compare_" + metric);
    std::filesystem::create_directories(dir);
    out.dir = dir;
    std::string csv = "samples_used";
    for (const auto& e : out.ranking) csv += "," + e.label;
    csv += "\n";
    const std::size_t rows = out.ranking.empty() ? 0 : out.ranking.front().samples.size();
    for (std::size_t r = 0; r < rows; ++r) {
      csv += fmt_g17(out.ranking.front().samples[r]);
      for (const auto& e : out.ranking) csv += "," + fmt_g17(e.mean[r]);
      csv += "\n";
    }
    write_atomic(dir / "curves.csv", csv);
    write_atomic(dir / "overlay.svg",
                 render_svg_logy(series, "comparison : " + metric, "samples per client", metric));
    nlohmann::json rank = nlohmann::json::array();
    for (const auto& e : out.ranking)
      rank.push_back({{"label", e.label}, {"final_mean", e.final_mean}});
    write_atomic(dir / "ranking.json", rank.dump(2) + "\n");
  }
  return out;
}

}  // namespace fedmm
