#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace fedmm {

/// Dense real vector used for all iterates and gradients. 64-bit floats only.
using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct DimensionError : Error {
  DimensionError(const std::string& where, Eigen::Index got, Eigen::Index want)
      : Error(where + ": dimension mismatch, got " + std::to_string(got) +
              ", expected " + std::to_string(want)) {}
};

/// Raised when an iterate or gradient stops being finite. Carries enough
/// context (operation, round) to locate the blow-up.
struct NonFiniteError : Error {
  NonFiniteError(const std::string& op, std::int64_t round)
      : Error("non-finite value in " + op + " at round " + std::to_string(round)),
        operation(op),
        round(round) {}
  std::string operation;
  std::int64_t round;
};

struct ConfigError : Error {
  explicit ConfigError(std::vector<std::string> problems)
      : Error(join(problems)), issues(std::move(problems)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s = "invalid configuration:";
    for (const auto& e : v) s += "\n  - " + e;
    return s;
  }
};

inline bool all_finite(const Vec& v) { return v.allFinite(); }

inline void check_finite(const Vec& v, const std::string& op, std::int64_t round = -1) {
  if (!v.allFinite()) throw NonFiniteError(op, round);
}

/// a*x + y. Dimensions must agree; the scale must be finite.
inline Vec vec_axpy(double a, const Vec& x, const Vec& y) {
  if (x.size() != y.size()) throw DimensionError("vec_axpy", x.size(), y.size());
  if (!std::isfinite(a)) throw NonFiniteError("vec_axpy scale", -1);
  Vec r = a * x + y;
  check_finite(r, "vec_axpy");
  return r;
}

/// Serial mean of vectors in the order given. Aggregations that must be
/// bit-reproducible across thread counts go through this.
inline Vec serial_mean(const std::vector<Vec>& vs) {
  if (vs.empty()) throw Error("serial_mean: empty input");
  Vec acc = vs.front();
  for (std::size_t i = 1; i < vs.size(); ++i) {
    if (vs[i].size() != acc.size()) throw DimensionError("serial_mean", vs[i].size(), acc.size());
    acc += vs[i];
  }
  return acc / static_cast<double>(vs.size());
}

struct RunConfig {
  std::uint64_t seed = 0;
  std::int64_t rounds = 1;       // T
  std::int64_t metrics_every = 1;
  std::string output_dir;

  void validate() const {
    std::vector<std::string> issues;
    if (rounds < 1) issues.push_back("run.rounds must be >= 1, got " + std::to_string(rounds));
    if (metrics_every < 1)
      issues.push_back("run.metrics_every must be >= 1, got " + std::to_string(metrics_every));
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }
};

}  // namespace fedmm
