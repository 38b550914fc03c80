#pragma once

#include <cstdint>

namespace gicert {

// Counter-based generator built on the splitmix64 finalizer. Stateless:
// every drawn value is a pure function of (seed, stream tag, counter), so
// sampling order and thread count cannot change results. Stream tags keep
// edge draws, node draws and derived per-sample seeds in disjoint streams.
inline constexpr const char* kGeneratorId = "splitmix64-counter-v1";

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

inline std::uint64_t hash_combine(std::uint64_t a, std::uint64_t b) {
  return mix64(a ^ (mix64(b) + 0x9e3779b97f4a7c15ull + (a << 6) + (a >> 2)));
}

// Uniform double in [0, 1) from the top 53 bits.
inline double u01(std::uint64_t h) {
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

// Seed for sample i of a run; parallel evaluation order cannot change results.
inline std::uint64_t sample_seed(std::uint64_t run_seed, std::uint64_t index) {
  return hash_combine(run_seed, index);
}

namespace stream {
inline constexpr std::uint64_t kEdge = 0x45444745ull;  // edge-deletion draws
inline constexpr std::uint64_t kNode = 0x4e4f4445ull;  // node-deletion draws
inline constexpr std::uint64_t kUser = 0x55534552ull;  // test/tool helpers
}  // namespace stream

}  // namespace gicert
