#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fedmm/experiment.hpp"

namespace {

fedmm::ExperimentConfig load_config(const std::string& path,
                                    const std::vector<std::uint64_t>& seed_override,
                                    std::int64_t rounds_override) {
  auto cfg = fedmm::validate_config_text(fedmm::read_file(path));
  if (!seed_override.empty()) cfg.seeds = seed_override;
  if (rounds_override > 0) cfg.run.rounds = rounds_override;
  for (const auto& w : cfg.warnings) std::cout << "warning: " << w << "\n";
  return cfg;
}

void print_config_error(const fedmm::ConfigError& e) {
  std::cerr << "configuration rejected:\n";
  for (const auto& issue : e.issues) std::cerr << "  - " << issue << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fedmm: a federated minimax optimization laboratory"};
  app.require_subcommand(1);

  std::vector<std::uint64_t> seed_override;
  std::int64_t rounds_override = 0;
  app.add_option("--seed-override", seed_override, "replace the config's seed list")
      ->delimiter(',');
  app.add_option("--rounds-override", rounds_override, "replace the config's round count");

  // run ----------------------------------------------------------------
  auto* run = app.add_subcommand("run", "run one experiment config");
  std::string run_path;
  bool grid = false;
  std::string grid_metric = "dist_to_target";
  std::vector<double> grid_locals{1e-1, 1e-2, 1e-3};
  std::vector<double> grid_globals{1.0, 2.0};
  run->add_option("config", run_path, "experiment JSON")->required();
  run->add_flag("--grid", grid, "run the local x global learning-rate grid and pick the best cell");
  run->add_option("--grid-metric", grid_metric, "metric minimized by --grid");
  run->add_option("--grid-locals", grid_locals, "local rates for --grid")->delimiter(',');
  run->add_option("--grid-globals", grid_globals, "global rates for --grid")->delimiter(',');

  // compare ------------------------------------------------------------
  auto* cmp = app.add_subcommand("compare", "overlay several configs on a shared problem/budget");
  std::vector<std::string> cmp_paths;
  std::string cmp_metric;
  cmp->add_option("configs", cmp_paths, "experiment JSONs")->required()->expected(-1);
  cmp->add_option("--metric", cmp_metric, "metric to compare")->required();

  // validate -----------------------------------------------------------
  auto* val = app.add_subcommand("validate", "validate a config and echo materialized values");
  std::string val_path;
  val->add_option("config", val_path, "experiment JSON")->required();

  // presets ------------------------------------------------------------
  auto* pre = app.add_subcommand("presets", "print the materialized theorem schedule");
  std::string pre_setting, pre_problem;
  double pre_l = 0, pre_mu = -1, pre_mu1 = -1, pre_mu2 = -1, pre_sigma = 0, pre_diam = -1,
         pre_eps = -1;
  int pre_M = 1, pre_m = 1, pre_K = 1, pre_batch = 100;
  std::int64_t pre_T = 1000;
  pre->add_option("setting", pre_setting, "nc_pl|nc_1pc|nc_c|pointwise_max|pl_pl")->required();
  pre->add_option("--problem", pre_problem, "problem JSON to take constants from");
  pre->add_option("--l", pre_l, "smoothness constant");
  pre->add_option("--mu", pre_mu, "PL / strong-concavity modulus in y");
  pre->add_option("--mu1", pre_mu1, "PL modulus in x");
  pre->add_option("--mu2", pre_mu2, "PL modulus in y");
  pre->add_option("--sigma", pre_sigma, "gradient noise bound");
  pre->add_option("--diam-y", pre_diam, "diameter of Y");
  pre->add_option("--eps", pre_eps, "target accuracy (nc_1pc / nc_c)");
  pre->add_option("--clients", pre_M, "M");
  pre->add_option("--participants", pre_m, "m");
  pre->add_option("--local-steps", pre_K, "K");
  pre->add_option("--batch", pre_batch, "batch size");
  pre->add_option("--rounds", pre_T, "T");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*run) {
      auto cfg = load_config(run_path, seed_override, rounds_override);
      if (grid) {
        const auto g = fedmm::run_lr_grid(cfg, grid_locals, grid_globals, grid_metric);
        std::cout << "grid cells (" << g.cells.size() << "):\n";
        for (const auto& c : g.cells)
          std::cout << "  eta_local=" << c.eta_local << " eta_global=" << c.eta_global << "  "
                    << grid_metric << "=" << c.final_metric << "\n";
        const auto& b = g.best();
        std::cout << "best: eta_local=" << b.eta_local << " eta_global=" << b.eta_global << "  "
                  << grid_metric << "=" << b.final_metric << "\n"
                  << "artifacts under " << b.result.dir.parent_path().string() << "\n";
      } else {
        const auto r = fedmm::run_experiment(cfg);
        std::cout << "wrote " << r.dir.string() << "\n";
        for (const auto& s : r.seeds) {
          std::cout << "  seed " << s.seed << ": " << s.status;
          if (!s.message.empty()) std::cout << " (" << s.message << ")";
          std::cout << "\n";
        }
        if (!r.agg_mean.empty()) {
          std::cout << "final aggregate:";
          for (std::size_t k = 0; k < cfg.metrics.size(); ++k)
            std::cout << "  " << cfg.metrics[k] << "=" << r.agg_mean.back()[k];
          std::cout << "\n";
        }
      }
    } else if (*cmp) {
      std::vector<fedmm::ExperimentConfig> cfgs;
      for (const auto& path : cmp_paths)
        cfgs.push_back(load_config(path, seed_override, rounds_override));
      const auto r = fedmm::compare_experiments(cfgs, cmp_metric);
      std::cout << "ranking by final mean " << cmp_metric << ":\n";
      for (std::size_t i = 0; i < r.ranking.size(); ++i)
        std::cout << "  " << (i + 1) << ". " << r.ranking[i].label << "  "
                  << r.ranking[i].final_mean << "\n";
      std::cout << "artifacts under " << r.dir.string() << "\n";
    } else if (*val) {
      const auto cfg = load_config(val_path, {}, 0);
      std::cout << "config ok: " << cfg.experiment_id << "\n"
                << "materialized hyperparameters:\n"
                << fedmm::hyper_to_json(cfg.hyper).dump(2) << "\n";
    } else if (*pre) {
      const auto setting = fedmm::preset_from_string(pre_setting);
      if (!setting) {
        std::cerr << "unknown setting '" << pre_setting << "'\n";
        return 2;
      }
      fedmm::KnownConstants constants;
      if (!pre_problem.empty()) {
        const auto p = fedmm::problem_from_json(nlohmann::json::parse(fedmm::read_file(pre_problem)));
        constants = p.constants;
      } else {
        constants.l = pre_l;
        if (pre_mu >= 0) constants.mu = pre_mu;
        if (pre_mu1 >= 0) constants.mu1 = pre_mu1;
        if (pre_mu2 >= 0) constants.mu2 = pre_mu2;
        constants.sigma = pre_sigma;
        if (pre_diam >= 0) constants.diam_y = pre_diam;
      }
      fedmm::FederationConfig fed;
      fed.clients = pre_M;
      fed.participants = pre_m;
      fed.local_steps = pre_K;
      fed.batch_size = pre_batch;
      std::optional<double> eps;
      if (pre_eps > 0) eps = pre_eps;
      const auto hp = fedmm::preset_hyperparams(*setting, constants, fed, pre_T, eps);
      std::cout << fedmm::hyper_to_json(hp).dump(2) << "\n";
    }
  } catch (const fedmm::ConfigError& e) {
    print_config_error(e);
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
