#pragma once

#include <cstdint>

namespace derham {

/// Deterministic splitmix64 stream. Used for all seeded randomness so that
/// identical (seed, index) pairs give identical values on every platform;
/// std::random distributions are avoided on purpose.
class SplitMix64 {
public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double next_unit() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  /// Uniform in [-1, 1).
  double next_symmetric() { return 2.0 * next_unit() - 1.0; }

private:
  std::uint64_t state_;
};

/// Stable sub-stream seed: hash of (seed, tag). Lets independent consumers
/// (trial i, component k, ...) draw without sharing a cursor.
inline std::uint64_t substream(std::uint64_t seed, std::uint64_t tag) {
  SplitMix64 mix(seed ^ (0x6a09e667f3bcc909ull + tag * 0x9e3779b97f4a7c15ull));
  return mix.next_u64();
}

} // namespace derham
