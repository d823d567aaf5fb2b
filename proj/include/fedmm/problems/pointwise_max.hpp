#pragma once

#include <cmath>
#include <memory>
#include <variant>

#include "fedmm/problem.hpp"

namespace fedmm {

/// One smooth component F_c of a pointwise-max objective. Parametric so the
/// problem stays JSON-declarative.
struct PwmComponent {
  enum class Type { quadratic, linear };
  Type type = Type::quadratic;
  // quadratic: F(x) = scale * |x - center|^2 + offset
  // linear:    F(x) = center . x + offset   (scale unused)
  double scale = 1.0;
  Vec center;
  double offset = 0.0;

  double value(const Vec& x) const {
    if (type == Type::linear) return center.dot(x) + offset;
    return scale * (x - center).squaredNorm() + offset;
  }
  Vec grad(const Vec& x) const {
    if (type == Type::linear) return center;
    return (2.0 * scale * (x - center)).eval();
  }
  // Upper bound of the component Hessian spectral norm.
  double hess_bound() const { return type == Type::linear ? 0.0 : 2.0 * std::abs(scale); }
};

namespace detail {

struct PwmData {
  std::vector<PwmComponent> comps;
  std::vector<Vec> u;  // per-client additive x-linear heterogeneity (mean zero)
  int dim_x = 0;

  Vec F(const Vec& x) const {
    Vec out(static_cast<Eigen::Index>(comps.size()));
    for (std::size_t c = 0; c < comps.size(); ++c) out[static_cast<Eigen::Index>(c)] = comps[c].value(x);
    return out;
  }
  GradPair grad(int i, const Vec& x, const Vec& y) const {
    GradPair g{Vec::Zero(dim_x), F(x)};
    for (std::size_t c = 0; c < comps.size(); ++c)
      g.gx += y[static_cast<Eigen::Index>(c)] * comps[c].grad(x);
    if (!u.empty()) g.gx += u[i];
    return g;
  }
  double value(int i, const Vec& x, const Vec& y) const {
    double val = y.dot(F(x));
    if (!u.empty()) val += u[i].dot(x);
    return val;
  }
};

}  // namespace detail

/// f(x,y) = sum_c y_c F_c(x) over the probability simplex, the linear-in-y
/// reformulation of min_x max_c F_c(x). Heterogeneity is a mean-zero additive
/// linear term per client, which leaves every y-gradient and the global
/// objective unchanged.
inline ProblemSpec make_pointwise_max(std::vector<PwmComponent> components, int M,
                                      std::uint64_t seed, double hetero = 0.0) {
  const int n = static_cast<int>(components.size());
  if (n < 2) throw ConfigError({"pointwise_max: need at least 2 components, got " + std::to_string(n)});
  if (M < 1) throw ConfigError({"pointwise_max: M must be >= 1"});
  const int dim_x = static_cast<int>(components.front().center.size());
  for (const auto& c : components)
    if (c.center.size() != dim_x) throw ConfigError({"pointwise_max: component dims disagree"});

  auto data = std::make_shared<detail::PwmData>();
  data->comps = std::move(components);
  data->dim_x = dim_x;

  RngStream rng(seed);
  if (hetero != 0.0 && M > 1) {
    RngStream het = rng.derive(1);
    std::vector<Vec> u(M);
    Vec mean = Vec::Zero(dim_x);
    for (int i = 0; i < M; ++i) {
      u[i] = hetero * detail::random_gaussian(dim_x, 1, het).col(0);
      mean += u[i];
    }
    mean /= M;
    for (int i = 0; i < M; ++i) u[i] -= mean;
    data->u = std::move(u);
  }

  ProblemSpec p;
  p.dim_x = dim_x;
  p.dim_y = n;
  p.constraint = ConstraintSet::Simplex(n);
  p.family = "pointwise_max";

  for (int i = 0; i < M; ++i) {
    ClientShard shard;
    shard.client_id = i;
    shard.full_oracle = [data, i](const Vec& x, const Vec& y) { return data->grad(i, x, y); };
    shard.full_value = [data, i](const Vec& x, const Vec& y) { return data->value(i, x, y); };
    shard.oracle = [data, i](const Vec& x, const Vec& y, int, RngStream&) {
      return data->grad(i, x, y);
    };
    p.clients.push_back(std::move(shard));
  }

  // Constants estimated over an operating box |x|_2 <= R around the component
  // centers; the xy Hessian block is the Jacobian of F and grows with |x|.
  {
    double R = 1.0;
    for (const auto& c : data->comps) R = std::max(R, c.center.norm() + 2.0);
    double hxx = 0;
    for (const auto& c : data->comps) hxx = std::max(hxx, c.hess_bound());
    double jf = 0;  // max |grad F_c| over the box
    double fmax = 0;
    for (const auto& c : data->comps) {
      if (c.type == PwmComponent::Type::linear) {
        jf = std::max(jf, c.center.norm());
        fmax = std::max(fmax, c.center.norm() * R + std::abs(c.offset));
      } else {
        const double reach = R + c.center.norm();
        jf = std::max(jf, 2.0 * std::abs(c.scale) * reach);
        fmax = std::max(fmax, std::abs(c.scale) * reach * reach + std::abs(c.offset));
      }
    }
    const double nroot = std::sqrt(static_cast<double>(n));
    p.constants.l = hxx + nroot * jf;
    p.constants.G_y = nroot * fmax;
    p.constants.diam_y = std::sqrt(2.0);
    p.constants.estimated = {"l", "G_y", "phi_star"};
    if (!data->u.empty()) {
      double worst = 0;
      for (const auto& ui : data->u) worst = std::max(worst, ui.norm());
      p.constants.sigma_G = worst + 1e-12;
    }
    // Phi(x) = max_c F_c(x); coarse box grid for a Phi* estimate.
    double phi_star = std::numeric_limits<double>::infinity();
    if (dim_x <= 2) {
      const int g = 201;
      Vec x(dim_x);
      for (int i = 0; i < g; ++i) {
        x[0] = -R + 2.0 * R * i / (g - 1);
        if (dim_x == 1) {
          phi_star = std::min(phi_star, data->F(x).maxCoeff());
        } else {
          for (int j = 0; j < g; ++j) {
            x[1] = -R + 2.0 * R * j / (g - 1);
            phi_star = std::min(phi_star, data->F(x).maxCoeff());
          }
        }
      }
    } else {
      RngStream probe = rng.derive(2);
      Vec x(dim_x);
      for (int s = 0; s < 20000; ++s) {
        for (int d = 0; d < dim_x; ++d) x[d] = R * (2.0 * probe.uniform01() - 1.0);
        phi_star = std::min(phi_star, data->F(x).maxCoeff());
      }
    }
    p.constants.phi_star = phi_star;
  }

  auto& cf = p.closed_form;
  cf.phi = [data](const Vec& x) { return data->F(x).maxCoeff(); };
  cf.y_star = [data, n](const Vec& x) {
    Vec F = data->F(x);
    Eigen::Index best = 0;
    F.maxCoeff(&best);
    Vec y = Vec::Zero(n);
    y[best] = 1.0;
    return y;
  };

  p.params["clients"] = M;
  p.params["hetero"] = hetero;
  p.params["seed"] = seed;
  p.params["components"] = nlohmann::json::array();
  for (const auto& c : data->comps) {
    nlohmann::json jc;
    jc["type"] = c.type == PwmComponent::Type::linear ? "linear" : "quadratic";
    jc["scale"] = c.scale;
    jc["center"] = std::vector<double>(c.center.begin(), c.center.end());
    jc["offset"] = c.offset;
    p.params["components"].push_back(jc);
  }
  return p;
}

}  // namespace fedmm
