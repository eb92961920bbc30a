#pragma once

#include <cstdint>
#include <cmath>

// Counter-based splittable generator. Every tree node owns a 64-bit key;
// child keys and per-node draw streams are derived by hashing, so any
// subtree can be sampled independently of traversal order. The mixing
// function is the SplitMix64 finalizer (Steele-Lea-Flood / Vigna), which
// passes BigCrush and costs a handful of cycles.
namespace cascade::rng {

inline constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;

inline std::uint64_t mix64(std::uint64_t z) {
  z += kGolden;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Domain separators keep child-key derivation, draw streams and replica
// streams disjoint.
inline constexpr std::uint64_t kChildSalt   = 0x632be59bd9b4e019ULL;
inline constexpr std::uint64_t kDrawSalt    = 0xa812d533b1d8f4fbULL;
inline constexpr std::uint64_t kReplicaSalt = 0x9f31bd5c4a7e8d23ULL;
inline constexpr std::uint64_t kEnvSalt     = 0x517cc1b727220a95ULL;

inline std::uint64_t root_key(std::uint64_t seed) {
  return mix64(seed ^ 0x6a09e667f3bcc909ULL);
}

inline std::uint64_t child_key(std::uint64_t key, std::uint64_t child) {
  return mix64((key ^ kChildSalt) + (child + 1) * kGolden);
}

inline std::uint64_t replica_key(std::uint64_t seed, std::uint64_t replica,
                                 std::uint64_t attempt) {
  return mix64(mix64(seed ^ kReplicaSalt) + replica * kGolden + attempt);
}

// Per-node draw stream: j-th 64-bit variate of the node with the given key.
struct Stream {
  std::uint64_t base;
  std::uint64_t counter = 0;
  explicit Stream(std::uint64_t key) : base(key ^ kDrawSalt) {}
  std::uint64_t next_u64() { return mix64(base + (++counter) * kGolden); }
  double next_unit() {  // uniform in (0,1), never exactly 0
    return static_cast<double>((next_u64() >> 11) | 1ULL) * 0x1.0p-53;
  }
  double next_gaussian() {  // Box-Muller, one value per call (pair not cached)
    double u1 = next_unit();
    double u2 = next_unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }
};

} // namespace cascade::rng
