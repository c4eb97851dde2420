#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace drama {

using Rng = std::mt19937_64;

/// 64-bit FNV-1a. Stable across platforms; used for seed derivation and
/// hash-bucket token ids.
constexpr std::uint64_t fnv1a64(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

/// Every module rng is seeded with `seed ^ fnv1a64(tag)`, so one --seed
/// governs the whole pipeline while modules stay decorrelated.
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) {
  return seed ^ fnv1a64(tag);
}

inline Rng make_rng(std::uint64_t seed, std::string_view tag) {
  return Rng(derive_seed(seed, tag));
}

/// Uniform double in the open interval (0, 1). Built from raw bits so the
/// sequence does not depend on the standard library's distribution code.
inline double uniform_open(Rng& rng) {
  constexpr double kScale = 1.0 / 9007199254740992.0;  // 2^-53
  for (;;) {
    const double u = static_cast<double>(rng() >> 11) * kScale;
    if (u > 0.0) return u;
  }
}

/// Uniform integer in [0, n), unbiased (rejection sampling).
inline std::uint64_t uniform_index(Rng& rng, std::uint64_t n) {
  const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
  for (;;) {
    const std::uint64_t r = rng();
    if (r < limit) return r % n;
  }
}

/// Standard normal via Box-Muller on uniform_open.
double normal(Rng& rng);

/// Fisher-Yates shuffle driven by uniform_index (portable across stdlibs).
template <class Vec>
void shuffle(Vec& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) {
    const std::size_t j = uniform_index(rng, i);
    std::swap(v[i - 1], v[j]);
  }
}

}  // namespace drama
