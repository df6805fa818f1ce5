#pragma once

/**
 * Deterministic PRNG used throughout the toolkit.
 *
 * Algorithm: splitmix64 (Steele, Lea & Flood; Vigna's public-domain
 * reference constants). The generator state advances by the golden-ratio
 * increment 0x9E3779B97F4A7C15 and each output is produced by the usual
 * two-round xor/multiply finalizer. Scheme version: 1. Any reimplementation
 * that follows this recipe byte-for-byte reproduces every dataset, mock
 * transcript and bootstrap resample this code emits.
 *
 * Substreams: substream(seed, {k0, k1, ...}) folds each 64-bit key word
 * into the seed with one finalizer round (state = mix64(state + GOLDEN + k)),
 * yielding an independent stream per key tuple. Dataset samples use the
 * tuple (purpose, hops, context_len, index); mock model calls use
 * (purpose, fnv1a64(prompt)).
 */

#include <cstdint>
#include <string_view>
#include <vector>

namespace infoqa::rng {

inline constexpr int kSchemeVersion = 1;
inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

/// splitmix64 output finalizer (bijective mix of a 64-bit word).
inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

/// FNV-1a 64-bit hash, used to key substreams on string content.
inline std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xCBF29CE484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  return h;
}

class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return mix64(state_ += kGolden); }

  /// Uniform double in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Unbiased draw in [0, n) by rejection on the top range.
  std::uint64_t below(std::uint64_t n) {
    if (n == 0) return 0;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = next_u64();
    } while (x >= limit);
    return x % n;
  }

  /// Fisher-Yates shuffle, back to front.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(below(i));
      using std::swap;
      swap(v[i - 1], v[j]);
    }
  }

  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[static_cast<std::size_t>(below(v.size()))];
  }

 private:
  std::uint64_t state_;
};

/// Derive an independent stream from a seed and a key tuple.
inline SplitMix64 substream(std::uint64_t seed, std::initializer_list<std::uint64_t> keys) {
  std::uint64_t s = mix64(seed + kGolden);
  for (std::uint64_t k : keys) s = mix64(s + kGolden + k);
  return SplitMix64(s);
}

}  // namespace infoqa::rng
