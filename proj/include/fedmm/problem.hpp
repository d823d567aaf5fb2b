#pragma once

#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "fedmm/core.hpp"
#include "fedmm/geometry.hpp"
#include "fedmm/rng.hpp"

namespace fedmm {

struct GradPair {
  Vec gx, gy;
};

namespace detail {

inline Mat random_gaussian(int rows, int cols, RngStream& rng) {
  Mat m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = rng.normal();
  return m;
}

inline double spectral_norm_sym(const Mat& s) {
  Eigen::SelfAdjointEigenSolver<Mat> es(s);
  return es.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace detail

/// Problem constants consumed by theorem presets and diagnostics. Names in
/// `estimated` were obtained numerically (grid or sampling) rather than in
/// closed form.
struct KnownConstants {
  double l = 0;                    // Lipschitz-smoothness constant
  std::optional<double> mu;        // PL / strong-concavity modulus in y
  std::optional<double> mu1;       // PL modulus in x (two-sided PL)
  std::optional<double> mu2;       // PL modulus in y (two-sided PL)
  double sigma = 0;                // per-sample gradient noise bound
  double sigma_G = 0;              // heterogeneity bound
  std::optional<double> diam_y;    // D(Y)
  std::optional<double> G_y;       // Lipschitz constant of f in y
  std::optional<double> phi_star;  // lower bound of Phi
  std::vector<std::string> estimated;

  void validate() const {
    std::vector<std::string> issues;
    if (!(l > 0)) issues.push_back("constants.l must be > 0");
    auto nonneg = [&](const char* name, const std::optional<double>& v) {
      if (v && (!(std::isfinite(*v)) || *v < 0))
        issues.push_back(std::string("constants.") + name + " must be finite and >= 0");
    };
    nonneg("mu", mu);
    nonneg("mu1", mu1);
    nonneg("mu2", mu2);
    nonneg("diam_y", diam_y);
    nonneg("G_y", G_y);
    if (sigma < 0) issues.push_back("constants.sigma must be >= 0");
    if (sigma_G < 0) issues.push_back("constants.sigma_G must be >= 0");
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }

  bool is_estimated(const std::string& name) const {
    for (const auto& e : estimated)
      if (e == name) return true;
    return false;
  }
};

/// Optional analytic oracles. Every entry present must agree with the
/// iterative inner solvers; diagnostics use them as the second route of the
/// dual-route checks. p arguments are the smoothing coefficient of
/// fhat(x,y,z) = f(x,y) + p/2 |x-z|^2.
struct ClosedFormOracles {
  std::function<Vec(const Vec&)> y_star;                            // argmax_y f(x,.)
  std::function<double(const Vec&)> phi;                            // Phi(x)
  std::function<Vec(const Vec&)> grad_phi;                          // grad Phi(x)
  std::function<Vec(const Vec&, const Vec&, double)> x_star_of_yz;  // argmin_x fhat(.,y,z)
  std::function<Vec(const Vec&, double)> x_star_of_z;               // argmin_x max_y fhat
  std::function<double(const Vec&, const Vec&, double)> psi;        // Psi(y,z)
  std::function<double(const Vec&, double)> cap_p;                  // P(z)
  std::function<Vec(const Vec&, double)> moreau_prox;               // argmin_x Phi + p/2|x-x0|^2
  std::optional<std::pair<Vec, Vec>> saddle;
  std::optional<Vec> target_x;  // reference point for dist_to_target
  std::optional<Vec> target_y;
};

/// One client: stochastic minibatch oracle plus exact full-shard oracles.
/// The stochastic oracle must be unbiased for full_oracle.
struct ClientShard {
  int client_id = 0;
  std::function<GradPair(const Vec&, const Vec&, int, RngStream&)> oracle;
  std::function<GradPair(const Vec&, const Vec&)> full_oracle;
  std::function<double(const Vec&, const Vec&)> full_value;
};

/// A federated minimax instance f(x,y) = (1/M) sum_i f_i(x,y).
struct ProblemSpec {
  int dim_x = 0;
  int dim_y = 0;
  ConstraintSet constraint;
  std::vector<ClientShard> clients;
  KnownConstants constants;
  ClosedFormOracles closed_form;
  std::string family;     // serialization tag
  nlohmann::json params;  // family parameters + seed; the instance is a pure function of these

  int num_clients() const { return static_cast<int>(clients.size()); }

  void check_point(const Vec& x, const Vec& y) const {
    if (x.size() != dim_x) throw DimensionError("problem x", x.size(), dim_x);
    if (y.size() != dim_y) throw DimensionError("problem y", y.size(), dim_y);
  }
};

/// Exact mean of the client full-batch gradients, serial in client order.
inline GradPair full_gradient(const ProblemSpec& p, const Vec& x, const Vec& y) {
  p.check_point(x, y);
  GradPair acc = p.clients.front().full_oracle(x, y);
  for (std::size_t i = 1; i < p.clients.size(); ++i) {
    GradPair g = p.clients[i].full_oracle(x, y);
    acc.gx += g.gx;
    acc.gy += g.gy;
  }
  acc.gx /= static_cast<double>(p.clients.size());
  acc.gy /= static_cast<double>(p.clients.size());
  check_finite(acc.gx, "full_gradient x");
  check_finite(acc.gy, "full_gradient y");
  return acc;
}

inline double full_value(const ProblemSpec& p, const Vec& x, const Vec& y) {
  p.check_point(x, y);
  double acc = 0;
  for (const auto& c : p.clients) acc += c.full_value(x, y);
  return acc / static_cast<double>(p.clients.size());
}

/// Value of the smoothed objective fhat(x,y,z) = f(x,y) + p/2 |x-z|^2.
inline double fhat_value(const ProblemSpec& p, const Vec& x, const Vec& y, const Vec& z,
                         double p_smooth) {
  return full_value(p, x, y) + 0.5 * p_smooth * (x - z).squaredNorm();
}

/// Max over sample points and clients of |grad f_i - grad f|; a lower bound
/// estimate of sigma_G.
inline double measure_heterogeneity(const ProblemSpec& p,
                                    const std::vector<std::pair<Vec, Vec>>& sample_points) {
  if (sample_points.empty()) throw Error("measure_heterogeneity: no sample points");
  double worst = 0;
  for (const auto& [x, y] : sample_points) {
    const GradPair mean = full_gradient(p, x, y);
    for (const auto& c : p.clients) {
      const GradPair g = c.full_oracle(x, y);
      const double d =
          std::sqrt((g.gx - mean.gx).squaredNorm() + (g.gy - mean.gy).squaredNorm());
      worst = std::max(worst, d);
    }
  }
  return worst;
}

}  // namespace fedmm
