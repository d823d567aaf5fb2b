#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "fedmm/federation.hpp"
#include "fedmm/problem.hpp"

namespace fedmm {

enum class PresetSetting { nc_pl, nc_1pc, nc_c, pointwise_max, pl_pl };

inline const char* to_string(PresetSetting s) {
  switch (s) {
    case PresetSetting::nc_pl: return "nc_pl";
    case PresetSetting::nc_1pc: return "nc_1pc";
    case PresetSetting::nc_c: return "nc_c";
    case PresetSetting::pointwise_max: return "pointwise_max";
    case PresetSetting::pl_pl: return "pl_pl";
  }
  return "?";
}

inline std::optional<PresetSetting> preset_from_string(const std::string& s) {
  if (s == "nc_pl") return PresetSetting::nc_pl;
  if (s == "nc_1pc") return PresetSetting::nc_1pc;
  if (s == "nc_c") return PresetSetting::nc_c;
  if (s == "pointwise_max") return PresetSetting::pointwise_max;
  if (s == "pl_pl") return PresetSetting::pl_pl;
  return std::nullopt;
}

/// Step sizes and smoothing knobs of the algorithm. Effective rates are the
/// local*global products.
struct HyperParams {
  double eta_x_local = 0.1;
  double eta_y_local = 0.1;
  double eta_x_global = 1.0;
  double eta_y_global = 1.0;
  double beta = 0.5;  // z anchor rate, (0,1]; 1 only as a degenerate diagnostic
  double p = 0.0;     // smoothing coefficient
  int K = 1;          // local steps per round

  struct Provenance {
    enum class Kind { manual, preset } kind = Kind::manual;
    std::string setting;             // preset tag when kind == preset
    std::vector<std::string> notes;  // estimated inputs, enforced caps, ...
  } provenance;

  double eta_x() const { return eta_x_local * eta_x_global; }
  double eta_y() const { return eta_y_local * eta_y_global; }

  void validate() const {
    std::vector<std::string> issues;
    auto pos = [&](const char* n, double v) {
      if (!(v > 0) || !std::isfinite(v))
        issues.push_back(std::string("hyper.") + n + " must be positive and finite");
    };
    pos("eta_x_local", eta_x_local);
    pos("eta_y_local", eta_y_local);
    pos("eta_x_global", eta_x_global);
    pos("eta_y_global", eta_y_global);
    if (!(beta > 0) || beta > 1.0 || !std::isfinite(beta))
      issues.push_back("hyper.beta must lie in (0, 1]");
    if (p < 0 || !std::isfinite(p)) issues.push_back("hyper.p must be >= 0");
    if (K < 1) issues.push_back("hyper.K must be >= 1");
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }
};

namespace detail {

// Cap on local rates from the drift lemma; vacuous at K = 1.
inline double local_cap_base(double l, int K) {
  if (K <= 1) return std::numeric_limits<double>::infinity();
  return 1.0 / (2.0 * l * std::sqrt(2.0 * (2.0 * K - 1.0) * (K - 1.0)));
}

}  // namespace detail

/// Warnings (not errors) when manual local rates exceed the theorem caps.
inline std::vector<std::string> theorem_cap_warnings(const HyperParams& hp,
                                                     const KnownConstants& constants) {
  std::vector<std::string> w;
  const double cap = detail::local_cap_base(constants.l, hp.K);
  if (hp.eta_x_local > cap)
    w.push_back("hyper.eta_x_local " + std::to_string(hp.eta_x_local) +
                " exceeds the local-drift cap " + std::to_string(cap));
  if (hp.eta_y_local > cap)
    w.push_back("hyper.eta_y_local " + std::to_string(hp.eta_y_local) +
                " exceeds the local-drift cap " + std::to_string(cap));
  return w;
}

/// Theorem-derived schedules. `target_eps` is needed by the settings whose
/// rates depend on the accuracy target (nc_1pc, nc_c); `delta_hint` stands in
/// for Delta = V_0 - Phi* in the stochastic eta_x rule and defaults to an
/// order-one energy scale flagged as estimated.
inline HyperParams preset_hyperparams(PresetSetting setting, const KnownConstants& constants,
                                      const FederationConfig& fed, std::int64_t T,
                                      std::optional<double> target_eps = std::nullopt,
                                      std::optional<double> delta_hint = std::nullopt) {
  constants.validate();
  fed.validate();
  const double l = constants.l;
  const int K = fed.local_steps;
  const double m = static_cast<double>(fed.participants);

  HyperParams hp;
  hp.K = K;
  hp.provenance.kind = HyperParams::Provenance::Kind::preset;
  hp.provenance.setting = to_string(setting);
  auto note = [&](const std::string& s) { hp.provenance.notes.push_back(s); };
  for (const auto& e : constants.estimated) note("constants." + e + " is a numerical estimate");

  // eta_x = min{1/(1000Kl), sqrt(m*Delta)/(sigma*sqrt(K*T*l))}; the second
  // term only binds for noisy runs.
  auto eta_x_rule = [&]() {
    double eta = 1.0 / (1000.0 * K * l);
    if (constants.sigma > 0) {
      double delta = delta_hint.value_or(1.0);
      if (!delta_hint) note("delta defaulted to 1.0 (estimated)");
      eta = std::min(eta, std::sqrt(m * delta) /
                              (constants.sigma * std::sqrt(static_cast<double>(K) * T * l)));
    }
    return eta;
  };

  const double cap1 = detail::local_cap_base(l, K);

  auto split = [&](double eta_eff, double extra_cap, double& local, double& global) {
    local = std::min({cap1, extra_cap, eta_eff});
    global = eta_eff / local;
  };

  switch (setting) {
    case PresetSetting::nc_pl: {
      if (!constants.mu)
        throw ConfigError({"preset nc_pl requires constants.mu (PL-in-y / strong-concavity assumption)"});
      hp.p = 2.0 * l;
      const double eta_x = eta_x_rule();
      const double eta_y = eta_x / 256.0;
      hp.beta = eta_y * K * (*constants.mu) / 80000.0;
      split(eta_x, std::sqrt(hp.beta / (6144.0 * eta_x * hp.p * l * l * K * K * K)),
            hp.eta_x_local, hp.eta_x_global);
      split(eta_y, std::sqrt(eta_y / (3072.0 * eta_x * l * l * K * K)), hp.eta_y_local,
            hp.eta_y_global);
      break;
    }
    case PresetSetting::nc_1pc: {
      if (!constants.diam_y)
        throw ConfigError({"preset nc_1pc requires constants.diam_y (compact-Y assumption)"});
      if (!target_eps || !(*target_eps > 0))
        throw ConfigError({"preset nc_1pc requires a positive target_eps"});
      const double eps = *target_eps, D = *constants.diam_y;
      if (eps * eps > l * D)
        throw ConfigError({"preset nc_1pc requires target_eps^2 <= l * D(Y)"});
      hp.p = 2.0 * l;
      const double eta_x = eta_x_rule();
      const double eta_y = eta_x / 256.0;
      hp.beta = eta_y * K * eps * eps / (80000.0 * D);
      split(eta_x, std::sqrt(hp.beta / (6144.0 * eta_x * hp.p * l * l * K * K * K)),
            hp.eta_x_local, hp.eta_x_global);
      split(eta_y, std::sqrt(eta_y / (3072.0 * eta_x * l * l * K * K)), hp.eta_y_local,
            hp.eta_y_global);
      break;
    }
    case PresetSetting::nc_c: {
      // Schedule of the regularized problem f - eps/(4 D)|y-y0|^2, which is
      // (l + eps/(2D))-smooth and eps/(2D)-strongly concave.
      if (!constants.diam_y)
        throw ConfigError({"preset nc_c requires constants.diam_y (compact-Y assumption)"});
      if (!target_eps || !(*target_eps > 0))
        throw ConfigError({"preset nc_c requires a positive target_eps"});
      const double eps = *target_eps, D = *constants.diam_y;
      if (eps > 2.0 * l * D) throw ConfigError({"preset nc_c requires target_eps <= 2 * l * D(Y)"});
      const double mu_reg = eps / (2.0 * D);
      const double l_reg = l + mu_reg;
      note("regularized condition number kappa' = " + std::to_string(2.0 * l * D / eps));
      hp.p = 2.0 * l_reg;
      const double eta_x = [&]() {
        double eta = 1.0 / (1000.0 * K * l_reg);
        if (constants.sigma > 0) {
          double delta = delta_hint.value_or(1.0);
          if (!delta_hint) note("delta defaulted to 1.0 (estimated)");
          eta = std::min(eta, std::sqrt(m * delta) /
                                  (constants.sigma * std::sqrt(static_cast<double>(K) * T * l_reg)));
        }
        return eta;
      }();
      const double eta_y = eta_x / 256.0;
      hp.beta = eta_y * K * mu_reg / 80000.0;
      const double c1 = detail::local_cap_base(l_reg, K);
      hp.eta_x_local = std::min(
          {c1, std::sqrt(hp.beta / (6144.0 * eta_x * hp.p * l_reg * l_reg * K * K * K)), eta_x});
      hp.eta_x_global = eta_x / hp.eta_x_local;
      hp.eta_y_local =
          std::min({c1, std::sqrt(eta_y / (3072.0 * eta_x * l_reg * l_reg * K * K)), eta_y});
      hp.eta_y_global = eta_y / hp.eta_y_local;
      break;
    }
    case PresetSetting::pointwise_max: {
      hp.p = 2.0 * l;
      const double eta_x = eta_x_rule();
      const double eta_y = eta_x / 256.0;
      // Only the computable term of the theorem's beta = min{eta_y K l / 80000,
      // ...} is used; the remaining terms involve uninstantiated constants.
      hp.beta = eta_y * K * l / 80000.0;
      note("beta uses the computable term of the theorem's min");
      split(eta_x, std::sqrt(hp.beta / (6144.0 * eta_x * hp.p * l * l * K * K * K)),
            hp.eta_x_local, hp.eta_x_global);
      split(eta_y, std::sqrt(eta_y / (3072.0 * eta_x * l * l * K * K)), hp.eta_y_local,
            hp.eta_y_global);
      break;
    }
    case PresetSetting::pl_pl: {
      if (!constants.mu1 || !constants.mu2)
        throw ConfigError({"preset pl_pl requires constants.mu1 and constants.mu2 (two-sided PL assumption)"});
      hp.p = 0.0;
      const double mu1 = *constants.mu1, mu2 = *constants.mu2;
      double eta_x, eta_y;
      if (mu1 >= mu2) {
        eta_y = 1.0 / (4.0 * l * K);
        eta_x = eta_y * mu2 * mu2 / (64.0 * l * l);
        split(eta_y, 1.0 / (std::sqrt(1536.0) * l * K), hp.eta_y_local, hp.eta_y_global);
        split(eta_x, std::sqrt(eta_x / (1536.0 * eta_y * l * l * K * K)), hp.eta_x_local,
              hp.eta_x_global);
      } else {
        eta_x = 1.0 / (4.0 * l * K);
        eta_y = eta_x * mu1 * mu1 / (64.0 * l * l);
        split(eta_x, 1.0 / (std::sqrt(1536.0) * l * K), hp.eta_x_local, hp.eta_x_global);
        split(eta_y, std::sqrt(eta_y / (1536.0 * eta_x * l * l * K * K)), hp.eta_y_local,
              hp.eta_y_global);
      }
      // beta is irrelevant at p = 0; keep it in range.
      hp.beta = 0.5;
      break;
    }
  }
  hp.validate();
  return hp;
}

}  // namespace fedmm
