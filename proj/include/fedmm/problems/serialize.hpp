#pragma once

#include <string>

#include "fedmm/problems/plpl_testbed.hpp"
#include "fedmm/problems/pointwise_max.hpp"
#include "fedmm/problems/quadratic.hpp"
#include "fedmm/problems/wgan1d.hpp"

namespace fedmm {

/// Problems are declarative: family tag + parameters + seed fully determine
/// the instance, including its synthetic data.
inline nlohmann::json problem_to_json(const ProblemSpec& p) {
  nlohmann::json out = p.params;
  out["family"] = p.family;
  return out;
}

namespace detail {

template <typename T>
T require_field(const nlohmann::json& j, const std::string& key, std::vector<std::string>& issues,
                const T& fallback) {
  if (!j.contains(key)) {
    issues.push_back("problem." + key + " is required for family '" +
                     j.value("family", std::string("?")) + "'");
    return fallback;
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception&) {
    issues.push_back("problem." + key + " has the wrong type");
    return fallback;
  }
}

inline Mat mat_from_json(const nlohmann::json& j, std::vector<std::string>& issues,
                         const std::string& key) {
  std::vector<std::vector<double>> rows;
  try {
    rows = j.get<std::vector<std::vector<double>>>();
  } catch (const nlohmann::json::exception&) {
    issues.push_back("problem." + key + " must be a 2-d array of numbers");
    return Mat::Zero(1, 1);
  }
  Mat m(rows.size(), rows.empty() ? 0 : rows.front().size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    if (rows[r].size() != static_cast<std::size_t>(m.cols())) {
      issues.push_back("problem." + key + " rows have inconsistent lengths");
      return Mat::Zero(1, 1);
    }
    for (std::size_t c = 0; c < rows[r].size(); ++c) m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = rows[r][c];
  }
  return m;
}

}  // namespace detail

inline ProblemSpec problem_from_json(const nlohmann::json& j) {
  std::vector<std::string> issues;
  if (!j.is_object()) throw ConfigError({"problem must be a JSON object"});
  const std::string family = j.value("family", std::string());
  if (family.empty()) throw ConfigError({"problem.family is required"});

  if (family == "wgan1d") {
    const int n = detail::require_field<int>(j, "n_points", issues, 0);
    const int M = detail::require_field<int>(j, "clients", issues, 1);
    const double mu_hat = j.value("mu_hat", 0.0);
    const double sigma_hat = j.value("sigma_hat", 0.1);
    const double lambda = detail::require_field<double>(j, "lambda", issues, 1.0);
    const double hetero = j.value("hetero", 0.0);
    const auto seed = j.value("seed", std::uint64_t{0});
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return make_wgan1d(n, M, mu_hat, sigma_hat, lambda, hetero, seed);
  }
  if (family == "quadratic") {
    const int dim_x = detail::require_field<int>(j, "dim_x", issues, 2);
    const int dim_y = detail::require_field<int>(j, "dim_y", issues, 2);
    const int M = detail::require_field<int>(j, "clients", issues, 1);
    QuadraticSpec spec;
    spec.c = j.value("c", 1.0);
    spec.eig_min = j.value("eig_min", -0.5);
    spec.eig_max = j.value("eig_max", 1.0);
    spec.b_scale = j.value("b_scale", 1.0);
    spec.hetero = j.value("hetero", 0.0);
    spec.noise_sigma = j.value("noise_sigma", 0.0);
    if (j.contains("A")) spec.A = detail::mat_from_json(j.at("A"), issues, "A");
    if (j.contains("B")) spec.B = detail::mat_from_json(j.at("B"), issues, "B");
    const auto seed = j.value("seed", std::uint64_t{0});
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return make_quadratic_minimax(dim_x, dim_y, M, spec, seed);
  }
  if (family == "plpl") {
    const int M = detail::require_field<int>(j, "clients", issues, 1);
    const double noise = j.value("noise_sigma", 0.0);
    const auto seed = j.value("seed", std::uint64_t{0});
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return make_plpl_testbed(M, noise, seed);
  }
  if (family == "pointwise_max") {
    const int M = detail::require_field<int>(j, "clients", issues, 1);
    const double hetero = j.value("hetero", 0.0);
    const auto seed = j.value("seed", std::uint64_t{0});
    std::vector<PwmComponent> comps;
    if (!j.contains("components") || !j.at("components").is_array()) {
      issues.push_back("problem.components must be an array for family 'pointwise_max'");
    } else {
      for (const auto& jc : j.at("components")) {
        PwmComponent c;
        const std::string type = jc.value("type", std::string("quadratic"));
        if (type == "linear")
          c.type = PwmComponent::Type::linear;
        else if (type == "quadratic")
          c.type = PwmComponent::Type::quadratic;
        else
          issues.push_back("problem.components[].type must be 'quadratic' or 'linear'");
        c.scale = jc.value("scale", 1.0);
        c.offset = jc.value("offset", 0.0);
        std::vector<double> center = jc.value("center", std::vector<double>{});
        if (center.empty()) issues.push_back("problem.components[].center is required");
        c.center = Eigen::Map<Vec>(center.data(), static_cast<Eigen::Index>(center.size()));
        comps.push_back(std::move(c));
      }
    }
    if (!issues.empty()) throw ConfigError(std::move(issues));
    return make_pointwise_max(std::move(comps), M, seed, hetero);
  }
  throw ConfigError({"unknown problem.family '" + family + "'"});
}

}  // namespace fedmm
