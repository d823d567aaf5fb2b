#include <catch2/catch_amalgamated.hpp>

#include "fedmm/optim.hpp"
#include "fedmm/problems/plpl_testbed.hpp"
#include "fedmm/problems/pointwise_max.hpp"
#include "fedmm/problems/quadratic.hpp"
#include "fedmm/problems/wgan1d.hpp"
#include "test_util.hpp"

using namespace fedmm;
using namespace fedmm::testutil;

namespace {

ProblemSpec constant_objective(int M) {
  ProblemSpec p;
  p.dim_x = 2;
  p.dim_y = 2;
  p.constraint = ConstraintSet::Unconstrained(2);
  p.family = "constant";
  for (int i = 0; i < M; ++i) {
    ClientShard shard;
    shard.client_id = i;
    shard.full_oracle = [](const Vec&, const Vec&) {
      return GradPair{Vec::Zero(2), Vec::Zero(2)};
    };
    shard.full_value = [](const Vec&, const Vec&) { return 3.0; };
    shard.oracle = [](const Vec&, const Vec&, int, RngStream&) {
      return GradPair{Vec::Zero(2), Vec::Zero(2)};
    };
    p.clients.push_back(std::move(shard));
  }
  p.constants.l = 1.0;
  return p;
}

std::vector<ParamState> collect_states(const ProblemSpec& p, const ParamState& init,
                                       const HyperParams& hp, const FederationConfig& fed,
                                       const RunConfig& cfg) {
  std::vector<ParamState> states;
  RunHooks hooks;
  hooks.on_round = [&](const ParamState& s) { states.push_back(s); };
  run_fessgda(p, init, hp, fed, cfg, hooks);
  return states;
}

}  // namespace

TEST_CASE("local_updates") {
  QuadraticSpec spec;
  const auto p = make_quadratic_minimax(2, 2, 1, spec, 3);
  RngStream rng(4);
  const Vec x0 = random_vec(rng, 2, 1.0), y0 = random_vec(rng, 2, 1.0);

  SECTION("one deterministic step is the closed form") {
    HyperParams hp;
    hp.K = 1;
    hp.eta_x_local = 0.03;
    hp.eta_y_local = 0.07;
    const RngStream cs = RngStream(9).derive(0);
    const auto r = local_updates(p, p.clients[0], x0, y0, hp, 10, cs);
    const GradPair g = p.clients[0].full_oracle(x0, y0);
    const Vec x_ref = x0 - hp.eta_x_local * g.gx;
    const Vec y_ref = project(p.constraint, y0 + hp.eta_y_local * g.gy);
    REQUIRE(r.x_final == x_ref);
    REQUIRE(r.y_final == y_ref);
    REQUIRE(r.samples == 10);
  }
  SECTION("constant objective is a fixed point for any K") {
    const auto cp = constant_objective(1);
    HyperParams hp;
    hp.K = 7;
    const auto r = local_updates(cp, cp.clients[0], x0, y0, hp, 5, RngStream(1).derive(0));
    REQUIRE(r.x_final == x0);
    REQUIRE(r.y_final == y0);
  }
  SECTION("K = 3 deterministic steps match a hand-rolled reference loop") {
    HyperParams hp;
    hp.K = 3;
    hp.eta_x_local = 0.02;
    hp.eta_y_local = 0.05;
    const auto r = local_updates(p, p.clients[0], x0, y0, hp, 10, RngStream(9).derive(0));
    Vec x = x0, y = y0;
    for (int k = 0; k < 3; ++k) {
      const GradPair g = p.clients[0].full_oracle(x, y);
      x = x - hp.eta_x_local * g.gx;
      y = project(p.constraint, y + hp.eta_y_local * g.gy);
    }
    REQUIRE(r.x_final == x);
    REQUIRE(r.y_final == y);
  }
}

TEST_CASE("fessgda_round algebra") {
  const auto p = make_wgan1d(500, 5, 0.0, 0.1, 0.01, 0.1, 5);
  FederationConfig fed;
  fed.clients = 5;
  fed.participants = 3;
  fed.local_steps = 2;
  fed.batch_size = 10;
  HyperParams hp;
  hp.K = 2;
  hp.eta_x_local = hp.eta_y_local = 0.01;
  hp.eta_x_global = 1.3;
  hp.eta_y_global = 0.8;
  hp.p = 1.0;
  RngStream rng(6);
  ParamState state;
  state.x = random_vec(rng, 2, 0.5);
  state.y = random_vec(rng, 2, 0.5);
  state.z = random_vec(rng, 2, 0.5);
  const RngStream run(7);

  SECTION("beta = 1 anchors z to x exactly") {
    hp.beta = 1.0;
    const auto next = fessgda_round(p, state, hp, fed, run);
    REQUIRE(next.z == next.x);
  }
  SECTION("x = z makes the smoothing correction vanish") {
    hp.beta = 0.5;
    ParamState anchored = state;
    anchored.z = anchored.x;
    HyperParams no_smoothing = hp;
    no_smoothing.p = 0.0;
    const auto with_p = fessgda_round(p, anchored, hp, fed, run);
    const auto without_p = fessgda_round(p, anchored, no_smoothing, fed, run);
    REQUIRE(with_p.x == without_p.x);
    REQUIRE(with_p.y == without_p.y);
  }
  SECTION("sample accounting") {
    hp.beta = 0.5;
    const auto next = fessgda_round(p, state, hp, fed, run);
    REQUIRE(next.samples_used == state.samples_used + 3 * 2 * 10);
    REQUIRE(next.t == state.t + 1);
  }
  SECTION("participant count errors surface") {
    fed.participants = 9;
    REQUIRE_THROWS_AS(fessgda_round(p, state, hp, fed, run), ConfigError);
  }
}

TEST_CASE("reduction: FESS-GDA with p=0, K arbitrary, unit globals is Local SGDA") {
  // Textbook parallel/local SGDA reference: clients run K plain SGDA steps
  // from the server state, the server averages the iterates. Shared RNG
  // streams, bit-identical trajectories expected.
  const auto p = make_wgan1d(1000, 10, 0.0, 0.1, 0.01, 0.1, 5);
  FederationConfig fed;
  fed.clients = 10;
  fed.participants = 10;  // full participation
  fed.local_steps = 1;    // K = 1: one SGDA step per round
  fed.batch_size = 25;
  HyperParams hp;
  hp.K = 1;
  hp.eta_x_local = hp.eta_y_local = 0.02;
  hp.eta_x_global = hp.eta_y_global = 1.0;
  hp.p = 0.0;
  hp.beta = 0.5;
  RunConfig cfg;
  cfg.seed = 77;
  cfg.rounds = 100;

  ParamState init;
  init.x = make_vec({0.4, 0.8});
  init.y = Vec::Zero(2);
  init.z = init.x;

  const auto states = collect_states(p, init, hp, fed, cfg);

  const RngStream run(cfg.seed);
  Vec x = init.x, y = init.y;
  REQUIRE(states.front().x == x);
  REQUIRE(states.front().y == y);
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    Vec xs = Vec::Zero(2), ys = Vec::Zero(2);
    for (int cid = 0; cid < fed.clients; ++cid) {
      Vec xc = x, yc = y;
      const RngStream cs = detail::client_stream(run, t, cid);
      for (int k = 0; k < fed.local_steps; ++k) {
        RngStream step = cs.derive(k);
        const GradPair g =
            p.clients[static_cast<std::size_t>(cid)].oracle(xc, yc, fed.batch_size, step);
        xc = xc - hp.eta_x_local * g.gx;
        yc = yc + hp.eta_y_local * g.gy;  // Y = R^2
      }
      if (cid == 0) {
        xs = xc;
        ys = yc;
      } else {
        xs += xc;
        ys += yc;
      }
    }
    x = xs / static_cast<double>(fed.clients);
    y = ys / static_cast<double>(fed.clients);
    REQUIRE(states[static_cast<std::size_t>(t + 1)].x == x);
    REQUIRE(states[static_cast<std::size_t>(t + 1)].y == y);
  }

  SECTION("K > 1 stays bit-identical too") {
    fed.local_steps = 5;
    hp.K = 5;
    RunConfig cfg5 = cfg;
    cfg5.rounds = 20;
    const auto states5 = collect_states(p, init, hp, fed, cfg5);
    const RngStream run5(cfg5.seed);
    Vec x5 = init.x, y5 = init.y;
    for (std::int64_t t = 0; t < cfg5.rounds; ++t) {
      Vec xs = Vec::Zero(2), ys = Vec::Zero(2);
      for (int cid = 0; cid < fed.clients; ++cid) {
        Vec xc = x5, yc = y5;
        const RngStream cs = detail::client_stream(run5, t, cid);
        for (int k = 0; k < fed.local_steps; ++k) {
          RngStream step = cs.derive(k);
          const GradPair g =
              p.clients[static_cast<std::size_t>(cid)].oracle(xc, yc, fed.batch_size, step);
          xc = xc - hp.eta_x_local * g.gx;
          yc = yc + hp.eta_y_local * g.gy;
        }
        if (cid == 0) {
          xs = xc;
          ys = yc;
        } else {
          xs += xc;
          ys += yc;
        }
      }
      x5 = xs / static_cast<double>(fed.clients);
      y5 = ys / static_cast<double>(fed.clients);
      REQUIRE(states5[static_cast<std::size_t>(t + 1)].x == x5);
      REQUIRE(states5[static_cast<std::size_t>(t + 1)].y == y5);
    }
  }
}

TEST_CASE("reduction: FESS-GDA with M=m=1, K=1, sigma=0 is Smoothed-GDA") {
  const auto check = [](const ProblemSpec& p, const Vec& x0, const Vec& y0) {
    FederationConfig fed;
    fed.clients = 1;
    fed.participants = 1;
    fed.local_steps = 1;
    fed.batch_size = 1;
    HyperParams hp;
    hp.K = 1;
    hp.eta_x_local = 1.0 / (1000.0 * p.constants.l);
    hp.eta_y_local = hp.eta_x_local / 4.0;
    hp.eta_x_global = hp.eta_y_global = 1.0;
    hp.p = 2.0 * p.constants.l;
    hp.beta = 0.05;
    RunConfig cfg;
    cfg.seed = 5;
    cfg.rounds = 100;
    ParamState init;
    init.x = x0;
    init.y = project(p.constraint, y0);
    init.z = x0;

    std::vector<ParamState> fess;
    {
      RunHooks hooks;
      hooks.on_round = [&](const ParamState& s) { fess.push_back(s); };
      run_fessgda(p, init, hp, fed, cfg, hooks);
    }
    std::vector<ParamState> direct;
    {
      RunHooks hooks;
      hooks.on_round = [&](const ParamState& s) { direct.push_back(s); };
      run_smoothed_gda(p, init, hp.eta_x_local, hp.eta_y_local, hp.beta, hp.p, cfg.rounds, hooks);
    }
    REQUIRE(fess.size() == direct.size());
    for (std::size_t i = 0; i < fess.size(); ++i) {
      REQUIRE(fess[i].x == direct[i].x);
      REQUIRE(fess[i].y == direct[i].y);
      REQUIRE(fess[i].z == direct[i].z);
    }
  };

  SECTION("quadratic, unconstrained") {
    QuadraticSpec spec;
    const auto p = make_quadratic_minimax(3, 2, 1, spec, 31);
    RngStream rng(32);
    check(p, random_vec(rng, 3, 1.0), random_vec(rng, 2, 1.0));
  }
  SECTION("pointwise max, simplex-constrained") {
    std::vector<PwmComponent> comps(3);
    comps[0].center = make_vec({1.0, 0.0});
    comps[1].center = make_vec({-1.0, 0.3});
    comps[2].center = make_vec({0.0, -0.7});
    const auto p = make_pointwise_max(comps, 1, 33);
    RngStream rng(34);
    check(p, random_vec(rng, 2, 1.0), random_vec(rng, 3, 1.0));
  }
}

TEST_CASE("FESS-GDA tracks an independent average-gradient SGDA numerically") {
  // The reduction holds exactly in real arithmetic; an average-the-gradient
  // implementation differs only by floating-point regrouping.
  QuadraticSpec spec;
  spec.hetero = 0.3;
  const auto p = make_quadratic_minimax(2, 2, 6, spec, 41);
  FederationConfig fed;
  fed.clients = 6;
  fed.participants = 6;
  fed.local_steps = 1;
  fed.batch_size = 1;
  HyperParams hp;
  hp.K = 1;
  hp.eta_x_local = hp.eta_y_local = 0.05;
  hp.eta_x_global = hp.eta_y_global = 1.0;
  hp.p = 0.0;
  hp.beta = 0.5;
  RunConfig cfg;
  cfg.seed = 42;
  cfg.rounds = 100;
  RngStream rng(43);
  ParamState init;
  init.x = random_vec(rng, 2, 1.0);
  init.y = random_vec(rng, 2, 1.0);
  init.z = init.x;

  const auto states = collect_states(p, init, hp, fed, cfg);
  Vec x = init.x, y = init.y;
  for (std::int64_t t = 0; t < cfg.rounds; ++t) {
    const GradPair g = full_gradient(p, x, y);  // sigma = 0: stochastic = full
    x = x - hp.eta_x_local * g.gx;
    y = y + hp.eta_y_local * g.gy;
    const auto& s = states[static_cast<std::size_t>(t + 1)];
    REQUIRE((s.x - x).norm() <= 1e-12 * std::max(1.0, x.norm()));
    REQUIRE((s.y - y).norm() <= 1e-12 * std::max(1.0, y.norm()));
  }
}

TEST_CASE("anchor z stays inside the iterate box") {
  const auto p = make_wgan1d(500, 5, 0.0, 0.1, 0.005, 0.2, 51);
  FederationConfig fed;
  fed.clients = 5;
  fed.participants = 3;
  fed.local_steps = 4;
  fed.batch_size = 10;
  HyperParams hp;
  hp.K = 4;
  hp.eta_x_local = hp.eta_y_local = 0.01;
  hp.beta = 0.3;
  hp.p = 1.0;
  RunConfig cfg;
  cfg.seed = 52;
  cfg.rounds = 80;
  ParamState init;
  init.x = make_vec({0.7, 0.9});
  init.y = Vec::Zero(2);
  init.z = init.x;

  Vec lo = init.x, hi = init.x;
  RunHooks hooks;
  hooks.on_round = [&](const ParamState& s) {
    if (s.t == 0) return;
    lo = lo.cwiseMin(s.x);
    hi = hi.cwiseMax(s.x);
    for (int k = 0; k < 2; ++k) {
      REQUIRE(s.z[k] >= lo[k] - 1e-15);
      REQUIRE(s.z[k] <= hi[k] + 1e-15);
    }
  };
  run_fessgda(p, init, hp, fed, cfg, hooks);
}

TEST_CASE("y iterates stay feasible on the simplex") {
  std::vector<PwmComponent> comps(3);
  comps[0].center = make_vec({1.0});
  comps[1].center = make_vec({-1.0});
  comps[2].center = make_vec({0.2});
  const auto p = make_pointwise_max(comps, 4, 61, 0.3);
  FederationConfig fed;
  fed.clients = 4;
  fed.participants = 2;
  fed.local_steps = 3;
  fed.batch_size = 1;
  HyperParams hp;
  hp.K = 3;
  hp.eta_x_local = 0.002;  // keeps eta_x * K * p well below 1
  hp.eta_y_local = 0.05;
  hp.eta_x_global = hp.eta_y_global = 1.5;
  hp.beta = 0.2;
  hp.p = 2.0 * p.constants.l;
  RunConfig cfg;
  cfg.seed = 62;
  cfg.rounds = 60;
  ParamState init;
  init.x = make_vec({0.9});
  init.y = project(p.constraint, make_vec({0.2, 0.3, 0.5}));
  init.z = init.x;
  RunHooks hooks;
  hooks.on_round = [&](const ParamState& s) {
    double sum = 0;
    for (int k = 0; k < 3; ++k) {
      REQUIRE(s.y[k] >= 0.0);
      sum += s.y[k];
    }
    REQUIRE(std::abs(sum - 1.0) <= 1e-12);
  };
  run_fessgda(p, init, hp, fed, cfg, hooks);
}

TEST_CASE("ncc_regularize") {
  std::vector<PwmComponent> comps(2);
  comps[0].center = make_vec({1.0});
  comps[1].center = make_vec({-1.0});
  const auto p = make_pointwise_max(comps, 2, 71);
  const Vec y0 = make_vec({0.5, 0.5});
  const double eps = 0.1;
  const auto reg = ncc_regularize(p, eps, y0);

  SECTION("gradient at the center is unchanged") {
    RngStream rng(72);
    const Vec x = random_vec(rng, 1, 1.0);
    const GradPair a = full_gradient(p, x, y0);
    const GradPair b = full_gradient(reg, x, y0);
    REQUIRE(a.gx == b.gx);
    REQUIRE((a.gy - b.gy).norm() <= 1e-15);
  }
  SECTION("vanishing epsilon recovers the original gradients") {
    const auto tiny = ncc_regularize(p, 1e-12, y0);
    RngStream rng(73);
    const Vec x = random_vec(rng, 1, 1.0);
    const Vec y = project(p.constraint, random_vec(rng, 2, 1.0));
    const GradPair a = full_gradient(p, x, y);
    const GradPair b = full_gradient(tiny, x, y);
    REQUIRE((a.gy - b.gy).norm() <= 1e-12);
  }
  SECTION("gradient deviation over feasible points is at most eps/2") {
    RngStream rng(74);
    for (int i = 0; i < 1000; ++i) {
      const Vec x = random_vec(rng, 1, 1.5);
      const Vec y = project(p.constraint, random_vec(rng, 2, 1.5));
      const GradPair a = full_gradient(p, x, y);
      const GradPair b = full_gradient(reg, x, y);
      const double dev = std::sqrt((a.gx - b.gx).squaredNorm() + (a.gy - b.gy).squaredNorm());
      REQUIRE(dev <= eps / 2.0 + 1e-12);
    }
  }
  SECTION("constants update") {
    REQUIRE(reg.constants.mu.value() ==
            Catch::Approx(eps / (2.0 * std::sqrt(2.0))).epsilon(1e-12));
    REQUIRE(reg.constants.l == Catch::Approx(p.constants.l + reg.constants.mu.value()));
  }
  SECTION("unbounded constraint is rejected") {
    QuadraticSpec spec;
    const auto q = make_quadratic_minimax(2, 2, 1, spec, 75);
    REQUIRE_THROWS_AS(ncc_regularize(q, 0.1, Vec::Zero(2)), ConfigError);
  }
  SECTION("epsilon beyond 2 l D(Y) is rejected") {
    REQUIRE_THROWS_AS(ncc_regularize(p, 1e9, y0), ConfigError);
  }
}

TEST_CASE("theorem presets") {
  FederationConfig fed;
  fed.clients = 4;
  fed.participants = 4;
  fed.local_steps = 10;
  fed.batch_size = 100;

  SECTION("nc_pl deterministic schedule") {
    KnownConstants c;
    c.l = 2.0;
    c.mu = 0.5;
    c.sigma = 0.0;
    const auto hp = preset_hyperparams(PresetSetting::nc_pl, c, fed, 1000);
    const double eta_x = 1.0 / (1000.0 * 10 * 2.0);
    REQUIRE(hp.p == 4.0);
    REQUIRE(hp.eta_x() == Catch::Approx(eta_x).epsilon(1e-12));
    REQUIRE(hp.eta_y() == Catch::Approx(eta_x / 256.0).epsilon(1e-12));
    REQUIRE(hp.beta == Catch::Approx(hp.eta_y() * 10 * 0.5 / 80000.0).epsilon(1e-9));
    REQUIRE(hp.provenance.kind == HyperParams::Provenance::Kind::preset);
    // Local rates respect the drift cap.
    const double cap = 1.0 / (2.0 * c.l * std::sqrt(2.0 * 19.0 * 9.0));
    REQUIRE(hp.eta_x_local <= cap * (1 + 1e-12));
    REQUIRE(hp.eta_y_local <= cap * (1 + 1e-12));
  }
  SECTION("nc_pl requires mu") {
    KnownConstants c;
    c.l = 2.0;
    REQUIRE_THROWS_WITH(preset_hyperparams(PresetSetting::nc_pl, c, fed, 100),
                        Catch::Matchers::ContainsSubstring("PL-in-y"));
  }
  SECTION("pl_pl two-timescale ratio") {
    KnownConstants c;
    c.l = 2.0;
    c.mu1 = 1.0;
    c.mu2 = 0.5;  // mu1 >= mu2: x is the slow side
    const auto hp = preset_hyperparams(PresetSetting::pl_pl, c, fed, 100);
    REQUIRE(hp.p == 0.0);
    REQUIRE(hp.eta_y() == Catch::Approx(1.0 / (4.0 * 2.0 * 10)).epsilon(1e-12));
    REQUIRE(hp.eta_x() ==
            Catch::Approx(hp.eta_y() * 0.25 / (64.0 * 4.0)).epsilon(1e-12));
    c.mu1 = 0.25;  // now mu1 < mu2: roles swap
    const auto hp2 = preset_hyperparams(PresetSetting::pl_pl, c, fed, 100);
    REQUIRE(hp2.eta_x() == Catch::Approx(1.0 / (4.0 * 2.0 * 10)).epsilon(1e-12));
    REQUIRE(hp2.eta_y() ==
            Catch::Approx(hp2.eta_x() * 0.0625 / (64.0 * 4.0)).epsilon(1e-12));
  }
  SECTION("pl_pl requires both moduli") {
    KnownConstants c;
    c.l = 2.0;
    c.mu1 = 1.0;
    REQUIRE_THROWS_WITH(preset_hyperparams(PresetSetting::pl_pl, c, fed, 100),
                        Catch::Matchers::ContainsSubstring("two-sided PL"));
  }
  SECTION("nc_c uses the regularized constants") {
    KnownConstants c;
    c.l = 2.0;
    c.diam_y = std::sqrt(2.0);
    const double eps = 0.2;
    const auto hp = preset_hyperparams(PresetSetting::nc_c, c, fed, 100, eps);
    const double mu_reg = eps / (2.0 * std::sqrt(2.0));
    const double l_reg = 2.0 + mu_reg;
    REQUIRE(hp.p == Catch::Approx(2.0 * l_reg).epsilon(1e-12));
    REQUIRE(hp.eta_x() == Catch::Approx(1.0 / (1000.0 * 10 * l_reg)).epsilon(1e-12));
    REQUIRE(hp.beta == Catch::Approx(hp.eta_y() * 10 * mu_reg / 80000.0).epsilon(1e-9));
    bool has_kappa_note = false;
    for (const auto& n : hp.provenance.notes)
      has_kappa_note = has_kappa_note || n.find("kappa'") != std::string::npos;
    REQUIRE(has_kappa_note);
    REQUIRE_THROWS_AS(preset_hyperparams(PresetSetting::nc_c, c, fed, 100), ConfigError);
  }
  SECTION("nc_1pc beta depends on the accuracy target") {
    KnownConstants c;
    c.l = 2.0;
    c.diam_y = std::sqrt(2.0);
    const double eps = 0.3;
    const auto hp = preset_hyperparams(PresetSetting::nc_1pc, c, fed, 100, eps);
    REQUIRE(hp.beta ==
            Catch::Approx(hp.eta_y() * 10 * eps * eps / (80000.0 * std::sqrt(2.0))).epsilon(1e-9));
    REQUIRE_THROWS_WITH(preset_hyperparams(PresetSetting::nc_1pc, c, fed, 100),
                        Catch::Matchers::ContainsSubstring("target_eps"));
  }
  SECTION("stochastic eta_x rule binds for long noisy runs") {
    KnownConstants c;
    c.l = 2.0;
    c.mu = 0.5;
    c.sigma = 5.0;
    const auto hp = preset_hyperparams(PresetSetting::nc_pl, c, fed, 4000000, std::nullopt, 1.0);
    const double stochastic = std::sqrt(4.0 * 1.0) / (5.0 * std::sqrt(10.0 * 4000000.0 * 2.0));
    REQUIRE(hp.eta_x() == Catch::Approx(stochastic).epsilon(1e-9));
    REQUIRE(hp.eta_x() < 1.0 / (1000.0 * 10 * 2.0));
  }
}

TEST_CASE("manual rates above the drift cap warn but do not error") {
  KnownConstants c;
  c.l = 2.0;
  HyperParams hp;
  hp.K = 10;
  hp.eta_x_local = 0.5;
  hp.eta_y_local = 1e-4;
  const auto warnings = theorem_cap_warnings(hp, c);
  REQUIRE(warnings.size() == 1);
  REQUIRE(warnings[0].find("eta_x_local") != std::string::npos);
}

TEST_CASE("local SGDA baseline") {
  const auto p = make_wgan1d(1000, 10, 0.0, 0.1, 0.01, 0.0, 81);
  FederationConfig fed;
  fed.clients = 10;
  fed.participants = 5;
  fed.local_steps = 10;
  fed.batch_size = 100;
  HyperParams hp;
  hp.K = 10;
  hp.eta_x_local = hp.eta_y_local = 0.01;
  hp.eta_x_global = 2.0;  // forced to 1 by the wrapper
  hp.eta_y_global = 2.0;
  hp.p = 5.0;  // forced to 0 by the wrapper
  hp.beta = 0.05;
  RunConfig cfg;
  cfg.seed = 82;
  cfg.rounds = 50;
  ParamState init;
  init.x = make_vec({0.5, 0.8});
  init.y = Vec::Zero(2);
  init.z = init.x;

  SECTION("identical trajectory to FESS-GDA under the forced settings") {
    std::vector<ParamState> base, wrapped;
    RunHooks hb, hw;
    hb.on_round = [&](const ParamState& s) { base.push_back(s); };
    hw.on_round = [&](const ParamState& s) { wrapped.push_back(s); };
    HyperParams forced = hp;
    forced.p = 0.0;
    forced.eta_x_global = forced.eta_y_global = 1.0;
    run_fessgda(p, init, forced, fed, cfg, hb);
    run_local_sgda_baseline(p, init, hp, fed, cfg, hw);
    REQUIRE(base.size() == wrapped.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      REQUIRE(base[i].x == wrapped[i].x);
      REQUIRE(base[i].y == wrapped[i].y);
      REQUIRE(base[i].z == wrapped[i].z);
    }
  }
  SECTION("WGAN smoke run ends finite") {
    const auto r = run_local_sgda_baseline(p, init, hp, fed, cfg);
    REQUIRE(r.final_state.x.allFinite());
    REQUIRE(r.final_state.y.allFinite());
  }
  SECTION("constant objective never moves") {
    const auto cp = constant_objective(10);
    const auto r = run_local_sgda_baseline(cp, init, hp, fed, cfg);
    REQUIRE(r.final_state.x == init.x);
    REQUIRE(r.final_state.y == init.y);
  }
}

TEST_CASE("runs reject a zero round count and abort on blow-up") {
  QuadraticSpec spec;
  const auto p = make_quadratic_minimax(2, 2, 1, spec, 91);
  FederationConfig fed;
  fed.clients = 1;
  fed.participants = 1;
  HyperParams hp;
  RunConfig cfg;
  cfg.rounds = 0;
  ParamState init;
  init.x = Vec::Zero(2);
  init.y = Vec::Zero(2);
  init.z = init.x;
  REQUIRE_THROWS_AS(run_fessgda(p, init, hp, fed, cfg), ConfigError);

  cfg.rounds = 2000;
  HyperParams wild;
  wild.eta_x_local = wild.eta_y_local = 1e6;  // guaranteed divergence
  wild.K = 1;
  init.x = make_vec({1.0, 1.0});
  init.y = make_vec({1.0, 1.0});
  init.z = init.x;
  try {
    run_fessgda(p, init, wild, fed, cfg);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    REQUIRE(e.round >= 0);
    REQUIRE(std::string(e.what()).find("round") != std::string::npos);
  }
}
