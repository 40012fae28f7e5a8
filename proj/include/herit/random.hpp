#pragma once

#include <array>
#include <cstdint>

namespace herit {

/// SplitMix64 finaliser; a bijective 64-bit mixer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Key for the (a, b) cell of a counter-based stream rooted at `key`.
constexpr std::uint64_t counter_hash(std::uint64_t key, std::uint64_t a, std::uint64_t b) {
  return mix64(mix64(key ^ mix64(a)) + b);
}

/// Uniform double in [0, 1) from the top 53 bits.
constexpr double bits_to_unit(std::uint64_t bits) { return static_cast<double>(bits >> 11) * 0x1.0p-53; }

/// Seedable xoshiro256** generator with reproducible substreams.
///
/// A RandomSource is single-owner. Parallel work derives independent
/// substreams with `RandomSource(seed, stream)`, so replication r of an
/// experiment always sees the same draws regardless of scheduling.
class RandomSource {
 public:
  explicit RandomSource(std::uint64_t seed, std::uint64_t stream = 0);

  /// Child stream keyed on this generator's seed material; does not advance *this.
  RandomSource substream(std::uint64_t index) const;

  std::uint64_t next_u64();
  /// Uniform on [0, 1).
  double uniform();
  /// Standard normal (Marsaglia polar method).
  double normal();

  std::uint64_t key() const { return key_; }

 private:
  std::array<std::uint64_t, 4> state_{};
  std::uint64_t key_ = 0;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace herit
