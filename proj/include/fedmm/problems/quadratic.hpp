#pragma once

#include <cmath>
#include <memory>
#include <optional>

#include "fedmm/problem.hpp"

namespace fedmm {

/// Parameters of the quadratic NC-SC test family
///   f_i(x,y) = 1/2 x'Ax + x'By - c/2 |y|^2 + u_i'x + v_i'y,
/// with A possibly indefinite, c > 0, and mean-zero per-client linear terms
/// scaled by `hetero` so the global objective is unchanged while sigma_G is a
/// knob. Every closed-form oracle is available.
struct QuadraticSpec {
  std::optional<Mat> A;  // explicit; generated from the spectrum below when absent
  std::optional<Mat> B;
  double c = 1.0;
  double eig_min = -0.5;  // generated-A spectrum range
  double eig_max = 1.0;
  double b_scale = 1.0;
  double hetero = 0.0;
  double noise_sigma = 0.0;
};

namespace detail {

struct QuadData {
  Mat A, B, H;  // H = A + B B'/c
  double c = 1;
  double noise_sigma = 0;
  int dim_x = 0, dim_y = 0;
  std::vector<Vec> u, v;  // per-client linear terms

  Vec solve_x_of_yz(const Vec& y, const Vec& z, double p) const {
    Mat S = A + p * Mat::Identity(dim_x, dim_x);
    return S.ldlt().solve(p * z - B * y);
  }
  Vec solve_x_of_z(const Vec& z, double p) const {
    Mat S = H + p * Mat::Identity(dim_x, dim_x);
    return S.ldlt().solve(p * z);
  }
  double value(int i, const Vec& x, const Vec& y) const {
    double val = 0.5 * x.dot(A * x) + x.dot(B * y) - 0.5 * c * y.squaredNorm();
    if (!u.empty()) val += u[i].dot(x) + v[i].dot(y);
    return val;
  }
  GradPair grad(int i, const Vec& x, const Vec& y) const {
    GradPair g{A * x + B * y, B.transpose() * x - c * y};
    if (!u.empty()) {
      g.gx += u[i];
      g.gy += v[i];
    }
    return g;
  }
};

}  // namespace detail

inline ProblemSpec make_quadratic_minimax(int dim_x, int dim_y, int M, const QuadraticSpec& spec,
                                          std::uint64_t seed) {
  if (!(spec.c > 0)) throw ConfigError({"quadratic: c must be > 0 (strong concavity)"});
  if (M < 1) throw ConfigError({"quadratic: M must be >= 1"});

  auto data = std::make_shared<detail::QuadData>();
  data->c = spec.c;
  data->noise_sigma = spec.noise_sigma;
  data->dim_x = dim_x;
  data->dim_y = dim_y;

  RngStream rng(seed);
  RngStream gen = rng.derive(0);
  if (spec.A || spec.B) {
    // Explicit matrices: take them as given, but Phi(x) = 1/2 x'Hx still
    // needs H = A + BB'/c positive definite for a finite Phi*.
    if (spec.A) {
      if (spec.A->rows() != dim_x || spec.A->cols() != dim_x)
        throw ConfigError({"quadratic: explicit A has wrong shape"});
      data->A = 0.5 * (*spec.A + spec.A->transpose());
    } else {
      data->A = Mat::Identity(dim_x, dim_x);
    }
    if (spec.B) {
      if (spec.B->rows() != dim_x || spec.B->cols() != dim_y)
        throw ConfigError({"quadratic: explicit B has wrong shape"});
      data->B = *spec.B;
    } else {
      data->B = Mat::Zero(dim_x, dim_y);
    }
    data->H = data->A + data->B * data->B.transpose() / spec.c;
    Eigen::SelfAdjointEigenSolver<Mat> es(data->H);
    if (es.eigenvalues().minCoeff() <= 1e-12)
      throw Error("quadratic: singular assembled system, A + BB'/c is not positive definite");
  } else {
    // Generated instance: build H positive definite first, then carve the
    // coupling out of it. Scaling B so that lambda_max(BB'/c) exceeds the top
    // of H's spectrum by |eig_min| guarantees A = H - BB'/c is indefinite,
    // i.e. the x side is genuinely nonconvex, while Phi stays well posed.
    const Mat G = detail::random_gaussian(dim_x, dim_x, gen);
    const Mat Q = Eigen::HouseholderQR<Mat>(G).householderQ();
    const double top = std::max(spec.eig_max, 0.1);
    const Vec h = Vec::LinSpaced(dim_x, 0.3 * top, top);
    Mat H0 = Q * h.asDiagonal() * Q.transpose();
    H0 = 0.5 * (H0 + H0.transpose().eval());
    Mat B = detail::random_gaussian(dim_x, dim_y, gen);
    const double lam = detail::spectral_norm_sym(B * B.transpose());
    const double want = spec.c * (std::abs(spec.eig_min) * std::max(spec.b_scale, 1e-6) + top);
    B *= std::sqrt(want / lam);
    data->B = B;
    data->A = H0 - B * B.transpose() / spec.c;
    data->A = 0.5 * (data->A + data->A.transpose().eval());
    data->H = data->A + B * B.transpose() / spec.c;
  }

  if (spec.hetero != 0.0 && M > 1) {
    RngStream het = rng.derive(1);
    std::vector<Vec> u(M), v(M);
    Vec mu_u = Vec::Zero(dim_x), mu_v = Vec::Zero(dim_y);
    for (int i = 0; i < M; ++i) {
      u[i] = spec.hetero * detail::random_gaussian(dim_x, 1, het).col(0);
      v[i] = spec.hetero * detail::random_gaussian(dim_y, 1, het).col(0);
      mu_u += u[i];
      mu_v += v[i];
    }
    mu_u /= M;
    mu_v /= M;
    for (int i = 0; i < M; ++i) {
      u[i] -= mu_u;
      v[i] -= mu_v;
    }
    data->u = std::move(u);
    data->v = std::move(v);
  }

  ProblemSpec p;
  p.dim_x = dim_x;
  p.dim_y = dim_y;
  p.constraint = ConstraintSet::Unconstrained(dim_y);
  p.family = "quadratic";

  const int d_total = dim_x + dim_y;
  for (int i = 0; i < M; ++i) {
    ClientShard shard;
    shard.client_id = i;
    shard.full_oracle = [data, i](const Vec& x, const Vec& y) { return data->grad(i, x, y); };
    shard.full_value = [data, i](const Vec& x, const Vec& y) { return data->value(i, x, y); };
    shard.oracle = [data, i, d_total](const Vec& x, const Vec& y, int batch, RngStream& rng) {
      GradPair g = data->grad(i, x, y);
      if (data->noise_sigma > 0) {
        // One simulated sample has E|noise|^2 = sigma^2; a batch of b
        // i.i.d. samples scales it by 1/b.
        const double sd = data->noise_sigma / std::sqrt(static_cast<double>(batch) * d_total);
        for (Eigen::Index k = 0; k < g.gx.size(); ++k) g.gx[k] += sd * rng.normal();
        for (Eigen::Index k = 0; k < g.gy.size(); ++k) g.gy[k] += sd * rng.normal();
      }
      return g;
    };
    p.clients.push_back(std::move(shard));
  }

  // Constants, all exact for this family.
  Mat kkt(d_total, d_total);
  kkt.topLeftCorner(dim_x, dim_x) = data->A;
  kkt.topRightCorner(dim_x, dim_y) = data->B;
  kkt.bottomLeftCorner(dim_y, dim_x) = data->B.transpose();
  kkt.bottomRightCorner(dim_y, dim_y) = -spec.c * Mat::Identity(dim_y, dim_y);
  p.constants.l = detail::spectral_norm_sym(kkt);
  p.constants.mu = spec.c;
  p.constants.sigma = spec.noise_sigma;
  p.constants.phi_star = 0.0;
  if (!data->u.empty()) {
    double worst = 0;
    Vec mu_u = Vec::Zero(dim_x), mu_v = Vec::Zero(dim_y);
    for (int i = 0; i < M; ++i) {
      mu_u += data->u[i];
      mu_v += data->v[i];
    }
    mu_u /= M;
    mu_v /= M;
    for (int i = 0; i < M; ++i)
      worst = std::max(worst, std::sqrt((data->u[i] - mu_u).squaredNorm() +
                                        (data->v[i] - mu_v).squaredNorm()));
    p.constants.sigma_G = worst + 1e-12;
  }

  auto& cf = p.closed_form;
  cf.y_star = [data](const Vec& x) { return (data->B.transpose() * x / data->c).eval(); };
  cf.phi = [data](const Vec& x) { return 0.5 * x.dot(data->H * x); };
  cf.grad_phi = [data](const Vec& x) { return (data->H * x).eval(); };
  cf.x_star_of_yz = [data](const Vec& y, const Vec& z, double ps) {
    return data->solve_x_of_yz(y, z, ps);
  };
  cf.x_star_of_z = [data](const Vec& z, double ps) { return data->solve_x_of_z(z, ps); };
  cf.psi = [data](const Vec& y, const Vec& z, double ps) {
    const Vec xs = data->solve_x_of_yz(y, z, ps);
    double val = 0.5 * xs.dot(data->A * xs) + xs.dot(data->B * y) - 0.5 * data->c * y.squaredNorm();
    return val + 0.5 * ps * (xs - z).squaredNorm();
  };
  cf.cap_p = [data](const Vec& z, double ps) {
    const Vec xs = data->solve_x_of_z(z, ps);
    return 0.5 * xs.dot(data->H * xs) + 0.5 * ps * (xs - z).squaredNorm();
  };
  cf.moreau_prox = [data](const Vec& x0, double ps) { return data->solve_x_of_z(x0, ps); };
  cf.saddle = std::make_pair(Vec::Zero(dim_x), Vec::Zero(dim_y));
  cf.target_x = Vec::Zero(dim_x);
  cf.target_y = Vec::Zero(dim_y);

  p.params = {{"dim_x", dim_x},        {"dim_y", dim_y},
              {"clients", M},          {"c", spec.c},
              {"eig_min", spec.eig_min}, {"eig_max", spec.eig_max},
              {"b_scale", spec.b_scale}, {"hetero", spec.hetero},
              {"noise_sigma", spec.noise_sigma}, {"seed", seed}};
  if (spec.A) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < dim_x; ++r)
      rows.emplace_back(spec.A->row(r).begin(), spec.A->row(r).end());
    p.params["A"] = rows;
  }
  if (spec.B) {
    std::vector<std::vector<double>> rows;
    for (int r = 0; r < dim_x; ++r)
      rows.emplace_back(spec.B->row(r).begin(), spec.B->row(r).end());
    p.params["B"] = rows;
  }
  return p;
}

}  // namespace fedmm
