#pragma once

#include <cstdint>

namespace spoofguard {

/// SplitMix64 (Steele, Lea & Flood 2014): a 64-bit counter advanced by the
/// golden-ratio increment 0x9E3779B97F4A7C15 and passed through the MurmurHash3
/// style finalizer (shifts 30/27/31, multipliers 0xBF58476D1CE4E5B9 and
/// 0x94D049BB133111EB).
///
/// Derived streams: derive_seed(seed, key) = mix64(seed ^ mix64(key + golden)).
/// Per-item streams are keyed by item identity, never by schedule, so results
/// do not depend on thread count.
class SplitMix64 {
 public:
  explicit SplitMix64(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next();

  /// Uniform double in [0, 1) built from the top 53 bits.
  double uniform();

  /// Uniform integer in [0, n), rejection-sampled (unbiased). n must be > 0.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller; consumes exactly two draws per call and
  /// returns the cosine branch.
  double normal();

 private:
  std::uint64_t state_;
};

inline constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

std::uint64_t mix64(std::uint64_t z);
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t key);

}  // namespace spoofguard
