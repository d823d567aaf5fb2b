#pragma once

#include <cmath>
#include <memory>

#include "fedmm/problem.hpp"

namespace fedmm {

namespace detail {

// One client's shard: noise draws z (possibly shifted per client) paired with
// real samples x = mu_hat + sigma_hat * z. Pairing makes every client gradient
// in y exactly -2*lambda*phi at the matched generator.
struct WganShard {
  std::vector<double> z, xr;
};

struct WganData {
  std::vector<WganShard> shards;
  double lambda = 0;
  double mu_hat = 0, sigma_hat = 0;

  // x = (mu, sigma), y = (phi1, phi2); gradient of one sample j.
  inline void sample_grad(int ci, std::size_t j, const Vec& x, const Vec& y, double* g) const {
    const auto& s = shards[ci];
    const double G = x[0] + x[1] * s.z[j];
    const double dD = y[0] + 2.0 * y[1] * G;  // d D(G)/dG
    g[0] = -dD;
    g[1] = -dD * s.z[j];
    g[2] = (s.xr[j] - G) - 2.0 * lambda * y[0];
    g[3] = (s.xr[j] * s.xr[j] - G * G) - 2.0 * lambda * y[1];
  }

  GradPair full_grad(int ci, const Vec& x, const Vec& y) const {
    const auto& s = shards[ci];
    double acc[4] = {0, 0, 0, 0}, g[4];
    for (std::size_t j = 0; j < s.z.size(); ++j) {
      sample_grad(ci, j, x, y, g);
      for (int k = 0; k < 4; ++k) acc[k] += g[k];
    }
    const double inv = 1.0 / static_cast<double>(s.z.size());
    GradPair out{Vec(2), Vec(2)};
    out.gx << acc[0] * inv, acc[1] * inv;
    out.gy << acc[2] * inv, acc[3] * inv;
    return out;
  }

  double value(int ci, const Vec& x, const Vec& y) const {
    const auto& s = shards[ci];
    double acc = 0;
    for (std::size_t j = 0; j < s.z.size(); ++j) {
      const double G = x[0] + x[1] * s.z[j];
      acc += y[0] * s.xr[j] + y[1] * s.xr[j] * s.xr[j] - y[0] * G - y[1] * G * G;
    }
    return acc / static_cast<double>(s.z.size()) - lambda * y.squaredNorm();
  }

  // Linear coefficient of f in phi over all shards: a(x) = (mean[xr - G], mean[xr^2 - G^2]).
  Vec a_of(const Vec& x) const {
    double a1 = 0, a2 = 0;
    std::size_t n = 0;
    for (const auto& s : shards) {
      for (std::size_t j = 0; j < s.z.size(); ++j) {
        const double G = x[0] + x[1] * s.z[j];
        a1 += s.xr[j] - G;
        a2 += s.xr[j] * s.xr[j] - G * G;
      }
      n += s.z.size();
    }
    Vec a(2);
    a << a1 / static_cast<double>(n), a2 / static_cast<double>(n);
    return a;
  }
};

}  // namespace detail

/// 1-D Wasserstein GAN toy problem: generator G(z) = mu + sigma*z against
/// discriminator D(t) = phi1*t + phi2*t^2 with ridge -lambda*|phi|^2, on a
/// fixed synthetic dataset of n_points pairs split evenly over M clients.
/// `hetero` shifts each shard's z (and its paired real data) by a mean-zero
/// per-client offset with stddev = hetero.
inline ProblemSpec make_wgan1d(int n_points, int M, double mu_hat, double sigma_hat,
                               double lambda, double hetero, std::uint64_t seed) {
  std::vector<std::string> issues;
  if (M < 1) issues.push_back("wgan1d: M must be >= 1");
  if (M >= 1 && n_points % M != 0)
    issues.push_back("wgan1d: n_points (" + std::to_string(n_points) +
                     ") must be divisible by M (" + std::to_string(M) + ")");
  if (!(lambda > 0)) issues.push_back("wgan1d: lambda must be > 0, the problem is not strongly concave otherwise");
  if (!(sigma_hat > 0)) issues.push_back("wgan1d: sigma_hat must be > 0");
  if (!issues.empty()) throw ConfigError(std::move(issues));

  auto data = std::make_shared<detail::WganData>();
  data->lambda = lambda;
  data->mu_hat = mu_hat;
  data->sigma_hat = sigma_hat;

  const int per = n_points / M;
  RngStream rng(seed);
  RngStream zdraw = rng.derive(0);

  // Mean-zero offset pattern with unit stddev (zero for M = 1).
  std::vector<double> delta(M, 0.0);
  if (M > 1 && hetero != 0.0) {
    double ss = 0;
    for (int i = 0; i < M; ++i) {
      delta[i] = static_cast<double>(i) - 0.5 * static_cast<double>(M - 1);
      ss += delta[i] * delta[i];
    }
    const double sd = std::sqrt(ss / M);
    for (int i = 0; i < M; ++i) delta[i] = hetero * delta[i] / sd;
  }

  data->shards.resize(M);
  for (int i = 0; i < M; ++i) {
    auto& s = data->shards[i];
    s.z.resize(per);
    s.xr.resize(per);
    for (int j = 0; j < per; ++j) {
      const double zj = zdraw.normal() + delta[i];
      s.z[j] = zj;
      s.xr[j] = mu_hat + sigma_hat * zj;
    }
  }

  ProblemSpec p;
  p.dim_x = 2;
  p.dim_y = 2;
  p.constraint = ConstraintSet::Unconstrained(2);
  p.family = "wgan1d";

  for (int i = 0; i < M; ++i) {
    ClientShard shard;
    shard.client_id = i;
    shard.full_oracle = [data, i](const Vec& x, const Vec& y) { return data->full_grad(i, x, y); };
    shard.full_value = [data, i](const Vec& x, const Vec& y) { return data->value(i, x, y); };
    shard.oracle = [data, i, per](const Vec& x, const Vec& y, int batch, RngStream& rng) {
      double acc[4] = {0, 0, 0, 0}, g[4];
      for (int b = 0; b < batch; ++b) {
        const auto j = static_cast<std::size_t>(rng.uniform_int(per));
        data->sample_grad(i, j, x, y, g);
        for (int k = 0; k < 4; ++k) acc[k] += g[k];
      }
      const double inv = 1.0 / static_cast<double>(batch);
      GradPair out{Vec(2), Vec(2)};
      out.gx << acc[0] * inv, acc[1] * inv;
      out.gy << acc[2] * inv, acc[3] * inv;
      return out;
    };
    p.clients.push_back(std::move(shard));
  }

  // Constants. mu = 2*lambda and Phi* = 0 are exact; l, sigma, sigma_G are
  // worst-case estimates over an operating box, flagged as such.
  p.constants.mu = 2.0 * lambda;
  p.constants.phi_star = 0.0;
  {
    const double b = 1.5;  // operating box half-width for (mu, sigma, phi1, phi2)
    std::vector<Vec> pts;
    for (double a0 : {-b, 0.0, b})
      for (double a1 : {-b, 0.3, b})
        for (double a2 : {-b, b})
          for (double a3 : {-b, b}) {
            Vec w(4);
            w << a0, a1, a2, a3;
            pts.push_back(w);
          }
    double l_hat = 2.0 * lambda, sg_hat = 0, sig_hat = 0;
    for (int i = 0; i < M; ++i) {
      double m1 = 0, m2 = 0;
      for (double zj : data->shards[i].z) {
        m1 += zj;
        m2 += zj * zj;
      }
      m1 /= per;
      m2 /= per;
      for (const Vec& w : pts) {
        Mat H(4, 4);
        const double mu = w[0], sg = w[1], p2 = w[3];
        H << -2 * p2, -2 * p2 * m1, -1, -2 * (mu + sg * m1),
            -2 * p2 * m1, -2 * p2 * m2, -m1, -2 * (mu * m1 + sg * m2),
            -1, -m1, -2 * lambda, 0,
            -2 * (mu + sg * m1), -2 * (mu * m1 + sg * m2), 0, -2 * lambda;
        l_hat = std::max(l_hat, detail::spectral_norm_sym(H));
      }
    }
    for (const Vec& w : pts) {
      const Vec x = w.head(2), y = w.tail(2);
      GradPair mean = full_gradient(p, x, y);
      for (int i = 0; i < M; ++i) {
        const GradPair gi = p.clients[i].full_oracle(x, y);
        sg_hat = std::max(sg_hat, std::sqrt((gi.gx - mean.gx).squaredNorm() +
                                            (gi.gy - mean.gy).squaredNorm()));
        // Exact per-sample variance over the shard at this point.
        double var = 0, g[4];
        const GradPair& gbar = gi;
        for (int j = 0; j < per; ++j) {
          data->sample_grad(i, static_cast<std::size_t>(j), x, y, g);
          var += (g[0] - gbar.gx[0]) * (g[0] - gbar.gx[0]) +
                 (g[1] - gbar.gx[1]) * (g[1] - gbar.gx[1]) +
                 (g[2] - gbar.gy[0]) * (g[2] - gbar.gy[0]) +
                 (g[3] - gbar.gy[1]) * (g[3] - gbar.gy[1]);
        }
        sig_hat = std::max(sig_hat, std::sqrt(var / per));
      }
    }
    p.constants.l = l_hat;
    p.constants.sigma = sig_hat;
    p.constants.sigma_G = sg_hat;
    p.constants.estimated = {"l", "sigma", "sigma_G"};
  }

  auto& cf = p.closed_form;
  cf.y_star = [data](const Vec& x) { return (data->a_of(x) / (2.0 * data->lambda)).eval(); };
  cf.phi = [data](const Vec& x) { return data->a_of(x).squaredNorm() / (4.0 * data->lambda); };
  cf.target_x = Vec(2);
  (*cf.target_x) << mu_hat, sigma_hat;

  p.params = {{"n_points", n_points}, {"clients", M},    {"mu_hat", mu_hat},
              {"sigma_hat", sigma_hat}, {"lambda", lambda}, {"hetero", hetero},
              {"seed", seed}};
  return p;
}

}  // namespace fedmm
