#pragma once

// Portable random streams. std::mt19937_64 is fully specified by the
// standard; the distributions are not, so the mapping to ranges is done here:
//
//   uniform(bound)   = floor(x * bound / 2^64)        (128-bit multiply)
//   bernoulli(p)     = (x >> 11) * 2^-53 < p
//
// where x is the next 64-bit output. Per-thread streams are seeded with
// derive_seed(base, stream), a splitmix64 finalizer over base + stream.

#include <cstdint>
#include <random>
#include <stdexcept>

#include "flatpq/heap.hpp"

namespace flatpq {

constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t base, std::uint64_t stream) noexcept {
  return splitmix64(base + splitmix64(stream));
}

class key_generator {
 public:
  explicit key_generator(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform key in [0, bound).
  key_type uniform(key_type bound) {
    if (bound <= 0) throw std::invalid_argument("key_generator: bound must be positive");
    const auto wide = static_cast<unsigned __int128>(engine_()) * static_cast<std::uint64_t>(bound);
    return static_cast<key_type>(wide >> 64);
  }

  bool bernoulli(double p) { return static_cast<double>(engine_() >> 11) * 0x1p-53 < p; }

 private:
  std::mt19937_64 engine_;
};

}  // namespace flatpq
