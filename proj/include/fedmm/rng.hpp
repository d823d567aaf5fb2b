#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

namespace fedmm {

namespace detail {
// SplitMix64 finalizer. Full-avalanche mix used both for sequence output and
// for key derivation.
inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ull;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}
}  // namespace detail

/// Counter-based splittable RNG stream. A stream is addressed by
/// (root_seed, path); deriving a child appends a suffix to the path. The
/// n-th draw is a pure function of (key, n), so (seed, client, round, step)
/// addresses any draw without shared mutable state.
class RngStream {
 public:
  explicit RngStream(std::uint64_t root_seed)
      : root_seed_(root_seed), key_(detail::mix64(root_seed ^ 0x6a09e667f3bcc909ull)) {}

  /// Child stream for `suffix`. Same (stream, suffix) always gives the same
  /// child; the parent is not advanced.
  RngStream derive(std::int64_t suffix) const {
    RngStream child = *this;
    child.path_.push_back(suffix);
    child.key_ = detail::mix64(child.key_ ^ detail::mix64(static_cast<std::uint64_t>(suffix) ^
                                                          0xd1b54a32d192ed03ull));
    child.counter_ = 0;
    return child;
  }

  std::uint64_t next_u64() { return detail::mix64(key_ + 0x9e3779b97f4a7c15ull * (++counter_)); }

  /// Uniform double in [0, 1).
  double uniform01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). Lemire multiply-shift; bias is O(n / 2^64).
  std::int64_t uniform_int(std::int64_t n) {
    const auto u = next_u64();
    return static_cast<std::int64_t>(
        static_cast<std::uint64_t>((static_cast<unsigned __int128>(u) * static_cast<std::uint64_t>(n)) >> 64));
  }

  /// Standard normal via Box-Muller. Consumes exactly two raw draws.
  double normal() {
    const double u1 = static_cast<double>((next_u64() >> 11) + 1) * 0x1.0p-53;  // (0, 1]
    const double u2 = uniform01();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  std::uint64_t root_seed() const { return root_seed_; }
  const std::vector<std::int64_t>& path() const { return path_; }

 private:
  std::uint64_t root_seed_;
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
  std::vector<std::int64_t> path_;
};

}  // namespace fedmm
