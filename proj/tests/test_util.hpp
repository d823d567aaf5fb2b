#pragma once

#include <utility>

#include "fedmm/problem.hpp"
#include "fedmm/rng.hpp"

namespace fedmm::testutil {

inline Vec make_vec(std::initializer_list<double> vals) {
  Vec v(static_cast<Eigen::Index>(vals.size()));
  Eigen::Index i = 0;
  for (double x : vals) v[i++] = x;
  return v;
}

inline Vec random_vec(RngStream& rng, int n, double scale) {
  Vec v(n);
  for (int i = 0; i < n; ++i) v[i] = scale * rng.normal();
  return v;
}

/// Central finite differences of the full objective, step 1e-6 scaled by the
/// coordinate magnitude. The independent oracle for gradient checks.
inline GradPair fd_gradient(const ProblemSpec& p, const Vec& x, const Vec& y) {
  GradPair g{Vec(p.dim_x), Vec(p.dim_y)};
  Vec xc = x, yc = y;
  for (Eigen::Index i = 0; i < p.dim_x; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(xc[i]));
    const double save = xc[i];
    xc[i] = save + h;
    const double fp = full_value(p, xc, y);
    xc[i] = save - h;
    const double fm = full_value(p, xc, y);
    xc[i] = save;
    g.gx[i] = (fp - fm) / (2.0 * h);
  }
  for (Eigen::Index i = 0; i < p.dim_y; ++i) {
    const double h = 1e-6 * std::max(1.0, std::abs(yc[i]));
    const double save = yc[i];
    yc[i] = save + h;
    const double fp = full_value(p, x, yc);
    yc[i] = save - h;
    const double fm = full_value(p, x, yc);
    yc[i] = save;
    g.gy[i] = (fp - fm) / (2.0 * h);
  }
  return g;
}

/// Relative error between the analytic full gradient and the FD oracle.
inline double fd_gradient_error(const ProblemSpec& p, const Vec& x, const Vec& y) {
  const GradPair a = full_gradient(p, x, y);
  const GradPair f = fd_gradient(p, x, y);
  const double num =
      std::sqrt((a.gx - f.gx).squaredNorm() + (a.gy - f.gy).squaredNorm());
  const double den = std::max(1.0, std::sqrt(a.gx.squaredNorm() + a.gy.squaredNorm()));
  return num / den;
}

}  // namespace fedmm::testutil
