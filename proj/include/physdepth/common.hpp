#pragma once

#include <cstdint>
#include <span>

namespace physdepth {

/// Version tag stamped into every JSON document the tools emit.
inline constexpr int kSpecVersion = 1;

/// Deterministic pairwise tree reduction. Loss kernels accumulate their
/// per-pixel terms into a buffer and reduce with this so the result does not
/// depend on how callers chunk the work.
inline double pairwise_sum(std::span<const double> terms) {
  if (terms.empty()) return 0.0;
  if (terms.size() <= 8) {
    double s = 0.0;
    for (double t : terms) s += t;
    return s;
  }
  const std::size_t half = terms.size() / 2;
  return pairwise_sum(terms.first(half)) + pairwise_sum(terms.subspan(half));
}

/// splitmix64 finalizer; stable across platforms.
inline std::uint64_t hash_mix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

/// Seeded per-pixel value in [0, 1); drives reproducible synthetic textures.
inline double hash_unit(std::uint64_t seed, std::uint64_t a, std::uint64_t b,
                        std::uint64_t c) {
  const std::uint64_t h = hash_mix(seed ^ hash_mix(a ^ hash_mix(b ^ hash_mix(c))));
  return static_cast<double>(h >> 11) * (1.0 / 9007199254740992.0);
}

}  // namespace physdepth
