#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <vector>

#include "fedmm/core.hpp"
#include "fedmm/rng.hpp"

namespace fedmm {

/// Simulated federation shape: M registered clients, m sampled per round,
/// K local steps, minibatch size per local step.
struct FederationConfig {
  int clients = 1;        // M
  int participants = 1;   // m
  int local_steps = 1;    // K
  int batch_size = 100;
  enum class Sampling { uniform_without_replacement } sampling =
      Sampling::uniform_without_replacement;

  bool full_participation() const { return participants == clients; }

  void validate() const {
    std::vector<std::string> issues;
    if (clients < 1) issues.push_back("federation.clients must be >= 1");
    if (participants < 1) issues.push_back("federation.participants must be >= 1");
    if (participants > clients)
      issues.push_back("federation.participants (" + std::to_string(participants) +
                       ") must not exceed federation.clients (" + std::to_string(clients) + ")");
    if (local_steps < 1) issues.push_back("federation.local_steps must be >= 1");
    if (batch_size < 1) issues.push_back("federation.batch_size must be >= 1");
    if (!issues.empty()) throw ConfigError(std::move(issues));
  }
};

struct ParticipationSample {
  std::int64_t round = 0;
  std::vector<int> client_ids;  // sorted ascending, distinct, size m
};

namespace detail {
// Reserved stream suffixes under a round stream.
inline constexpr std::int64_t kSamplerTag = 0;
inline constexpr std::int64_t kClientTag = 1;
inline constexpr std::int64_t kResampleTag = 2;
}  // namespace detail

/// Uniform sample without replacement of m client ids, deterministic given
/// (run stream, t). Partial Fisher-Yates, ids returned sorted.
inline ParticipationSample sample_participants(const FederationConfig& fed, std::int64_t t,
                                               const RngStream& run_stream) {
  fed.validate();
  RngStream rng = run_stream.derive(t).derive(detail::kSamplerTag);
  std::vector<int> ids(fed.clients);
  std::iota(ids.begin(), ids.end(), 0);
  for (int k = 0; k < fed.participants; ++k) {
    const auto j = k + rng.uniform_int(fed.clients - k);
    std::swap(ids[static_cast<std::size_t>(k)], ids[static_cast<std::size_t>(j)]);
  }
  ids.resize(fed.participants);
  std::sort(ids.begin(), ids.end());
  return {t, std::move(ids)};
}

}  // namespace fedmm
