#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <optional>
#include <vector>

#include "fedmm/core.hpp"

namespace fedmm {

/// Constraint set for the max variable y. X is always unconstrained.
struct ConstraintSet {
  enum class Kind { unconstrained, simplex, ball, box };

  Kind kind = Kind::unconstrained;
  int dim = 0;       // ambient dimension
  Vec center;        // ball
  double radius = 0; // ball
  Vec lo, hi;        // box

  static ConstraintSet Unconstrained(int dim) {
    ConstraintSet s;
    s.kind = Kind::unconstrained;
    s.dim = dim;
    return s;
  }
  static ConstraintSet Simplex(int n) {
    ConstraintSet s;
    s.kind = Kind::simplex;
    s.dim = n;
    s.validate();
    return s;
  }
  static ConstraintSet Ball(Vec center, double radius) {
    ConstraintSet s;
    s.kind = Kind::ball;
    s.dim = static_cast<int>(center.size());
    s.center = std::move(center);
    s.radius = radius;
    s.validate();
    return s;
  }
  static ConstraintSet Box(Vec lo, Vec hi) {
    ConstraintSet s;
    s.kind = Kind::box;
    s.dim = static_cast<int>(lo.size());
    s.lo = std::move(lo);
    s.hi = std::move(hi);
    s.validate();
    return s;
  }

  void validate() const {
    std::vector<std::string> issues;
    switch (kind) {
      case Kind::unconstrained:
        break;
      case Kind::simplex:
        if (dim < 2) issues.push_back("simplex needs n >= 2, got " + std::to_string(dim));
        break;
      case Kind::ball:
        if (!(radius > 0)) issues.push_back("ball radius must be > 0");
        if (center.size() != dim) issues.push_back("ball center dimension mismatch");
        break;
      case Kind::box:
        if (lo.size() != hi.size()) issues.push_back("box lo/hi dimension mismatch");
        for (Eigen::Index i = 0; i < lo.size(); ++i)
          if (!(lo[i] <= hi[i])) issues.push_back("box requires lo <= hi componentwise");
        break;
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }
};

namespace detail {

// Feasibility check used by the simplex fast path. The sort-threshold output
// always passes it, which makes project(project(v)) == project(v) exact.
inline bool simplex_feasible(const Vec& v) {
  double s = 0;
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (v[i] < 0) return false;
    s += v[i];
  }
  return std::abs(s - 1.0) <= 1e-12;
}

// Sort-then-threshold projection onto the unit simplex. Ties broken by index
// (stable sort), negatives clamped to exactly 0.
inline Vec project_simplex(const Vec& v) {
  if (simplex_feasible(v)) return v;
  const Eigen::Index n = v.size();
  std::vector<Eigen::Index> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return v[a] > v[b]; });
  double cumsum = 0;
  double theta = 0;
  Eigen::Index support = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    cumsum += v[order[j]];
    const double cand = (cumsum - 1.0) / static_cast<double>(j + 1);
    if (v[order[j]] - cand > 0) {
      theta = cand;
      support = j + 1;
    }
  }
  (void)support;
  Vec u(n);
  for (Eigen::Index i = 0; i < n; ++i) u[i] = std::max(v[i] - theta, 0.0);
  return u;
}

inline Vec project_ball(const ConstraintSet& set, const Vec& v) {
  Vec d = v - set.center;
  const double r2 = set.radius * set.radius;
  if (d.squaredNorm() <= r2) return v;
  Vec w = set.center + d * (set.radius / d.norm());
  // Rescaling can land an ulp outside; shrink until the inside-check passes so
  // a second projection returns w unchanged.
  Vec dw = w - set.center;
  while (dw.squaredNorm() > r2) {
    dw *= (1.0 - std::numeric_limits<double>::epsilon());
    w = set.center + dw;
    dw = w - set.center;
  }
  return w;
}

}  // namespace detail

/// Euclidean projection P_Y(v).
inline Vec project(const ConstraintSet& set, const Vec& v) {
  if (v.size() != set.dim) throw DimensionError("project", v.size(), set.dim);
  switch (set.kind) {
    case ConstraintSet::Kind::unconstrained:
      return v;
    case ConstraintSet::Kind::simplex:
      return detail::project_simplex(v);
    case ConstraintSet::Kind::ball:
      return detail::project_ball(set, v);
    case ConstraintSet::Kind::box:
      return v.cwiseMax(set.lo).cwiseMin(set.hi);
  }
  throw Error("project: unknown constraint kind");
}

/// Projected gradient mapping (P_Y(y + step*g) - y) / step. For the
/// unconstrained set this is g itself, computed directly so the identity is
/// exact.
inline Vec gradient_mapping(const ConstraintSet& set, const Vec& y, const Vec& g, double step) {
  if (!(step > 0)) throw Error("gradient_mapping: step must be > 0");
  if (set.kind == ConstraintSet::Kind::unconstrained) {
    if (y.size() != g.size()) throw DimensionError("gradient_mapping", g.size(), y.size());
    return g;
  }
  return (project(set, y + step * g) - y) / step;
}

/// Diameter D(Y); nullopt marks an unbounded set.
inline std::optional<double> diameter(const ConstraintSet& set) {
  switch (set.kind) {
    case ConstraintSet::Kind::unconstrained:
      return std::nullopt;
    case ConstraintSet::Kind::simplex:
      return std::sqrt(2.0);
    case ConstraintSet::Kind::ball:
      return 2.0 * set.radius;
    case ConstraintSet::Kind::box:
      return (set.hi - set.lo).norm();
  }
  return std::nullopt;
}

}  // namespace fedmm
