#pragma once

#include <cstdint>

namespace zenopm {

/// SplitMix64 finalizer; full avalanche over 64 bits.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

inline constexpr std::uint64_t kGoldenGamma = 0x9E3779B97F4A7C15ull;

/// Roles that draw random numbers; each gets a statistically disjoint stream.
enum class StreamPurpose : std::uint64_t {
  projective_outcome = 1,
  stage_survival = 2,
  pointer_position = 3,
  sweep_point = 4,
};

struct RunSeed {
  std::uint64_t value = 0;
};

/// Key of the substream owned by (seed, stream index, purpose). Streams are
/// counter-derived, so results do not depend on scheduling or thread count.
constexpr std::uint64_t substream_key(std::uint64_t seed, std::uint64_t stream,
                                      StreamPurpose purpose) {
  std::uint64_t k = mix64(seed + kGoldenGamma);
  k = mix64(k ^ (stream + kGoldenGamma));
  k = mix64(k ^ (static_cast<std::uint64_t>(purpose) * kGoldenGamma));
  return k;
}

/// Counter-based generator: the SplitMix64 sequence anchored at a stream key.
class CounterRng {
 public:
  explicit constexpr CounterRng(std::uint64_t key) : state_(key) {}

  constexpr std::uint64_t next_u64() {
    state_ += kGoldenGamma;
    return mix64(state_);
  }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_unit() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace zenopm
