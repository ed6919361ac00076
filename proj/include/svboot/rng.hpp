#pragma once

#include <array>
#include <cstdint>
#include <cstddef>

namespace sv {

/// splitmix64 finalizer; used for seed mixing and stream derivation.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derive a child seed from a parent seed and up to two stream ids.
/// Distinct id tuples give statistically independent streams, so replicate
/// and run loops can be parallelized without sharing generator state.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t id0,
                                    std::uint64_t id1 = 0) {
  std::uint64_t h = mix64(seed);
  h = mix64(h ^ mix64(id0));
  h = mix64(h ^ mix64(id1));
  return h;
}

/// xoshiro256** with explicit, platform-independent integer arithmetic.
/// std::mt19937 + std::normal_distribution are avoided on purpose: their
/// output sequences are implementation-defined, which would break the
/// fixed-seed reproducibility contract.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) {
    // Recommended state init: fill from a splitmix64 sequence.
    std::uint64_t s = seed;
    for (auto& w : state_) {
      s += 0x9e3779b97f4a7c15ULL;
      std::uint64_t z = s;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
      w = z ^ (z >> 31);
    }
    if (state_[0] == 0 && state_[1] == 0 && state_[2] == 0 && state_[3] == 0) {
      state_[0] = 1;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[1] * 5, 7) * 9;
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  /// Uniform double strictly inside (0, 1): 53-bit mantissa, offset by half
  /// an ulp so 0 and 1 are unreachable (inv_norm_cdf needs an open interval).
  double u01() {
    return (static_cast<double>(next_u64() >> 11) + 0.5) * 0x1.0p-53;
  }

  /// Standard normal draw by inversion. Deterministic given the stream state.
  double normal();

  /// Uniform index in [0, n). Fixed-point multiply keeps the bias below
  /// n / 2^64, negligible for the dataset sizes handled here.
  std::size_t uniform_index(std::size_t n) {
    return static_cast<std::size_t>(
        (static_cast<unsigned __int128>(next_u64()) * n) >> 64);
  }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::array<std::uint64_t, 4> state_{};
};

}  // namespace sv
