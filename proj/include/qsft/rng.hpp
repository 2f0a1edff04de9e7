// Deterministic randomness. Every draw is built from the standardized
// mt19937_64 stream (or a splitmix64 counter stream for keyed draws), with
// rejection sampling and Box-Muller spelled out here, so identical seeds give
// identical values on every platform and toolchain.

#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <string_view>

#include "qsft/qindex.hpp"

namespace qsft {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ull;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

// Stable sub-stream seed for a named purpose ("support", "noise", ...).
inline std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  std::uint64_t h = 0xcbf29ce484222325ull ^ base;
  for (char ch : tag) {
    h ^= static_cast<unsigned char>(ch);
    h *= 0x100000001b3ull;
  }
  return splitmix64(h);
}

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next() { return eng_(); }

  // Uniform in [0, bound), unbiased via rejection.
  std::uint32_t below(std::uint32_t bound) {
    if (bound == 0) throw std::invalid_argument("Rng::below: bound must be positive");
    const std::uint64_t limit = ~0ull - ~0ull % bound;
    std::uint64_t r;
    do {
      r = next();
    } while (r >= limit);
    return static_cast<std::uint32_t>(r % bound);
  }

  // Uniform in [0, 1) with 53 random bits.
  double unit() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  double gaussian() {
    const double u1 = 1.0 - unit();  // (0, 1]
    const double u2 = unit();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
  }

  // Circularly symmetric complex Gaussian with E|z|^2 = variance.
  cplx cgaussian(double variance) {
    if (variance <= 0.0) return {0.0, 0.0};
    const double u1 = 1.0 - unit();
    const double u2 = unit();
    const double mag = std::sqrt(-variance * std::log(u1));
    return std::polar(mag, 2.0 * std::numbers::pi * u2);
  }

  QIndex qindex(std::uint32_t q, std::size_t n) {
    std::vector<std::uint32_t> d(n);
    for (auto& v : d) v = below(q);
    return QIndex(q, std::move(d));
  }

 private:
  std::mt19937_64 eng_;
};

// Noise draw keyed on (seed, index, repeat) rather than call order, so the
// same query sees the same noise no matter how queries interleave.
inline cplx keyed_complex_gaussian(std::uint64_t seed, unsigned __int128 key,
                                   std::uint64_t repeat, double variance) {
  if (variance <= 0.0) return {0.0, 0.0};
  std::uint64_t state = seed;
  state ^= splitmix64(state) + static_cast<std::uint64_t>(key);
  state ^= splitmix64(state) + static_cast<std::uint64_t>(key >> 64);
  state ^= splitmix64(state) + repeat;
  const std::uint64_t a = splitmix64(state);
  const std::uint64_t b = splitmix64(state);
  const double u1 = 1.0 - static_cast<double>(a >> 11) * 0x1.0p-53;
  const double u2 = static_cast<double>(b >> 11) * 0x1.0p-53;
  const double mag = std::sqrt(-variance * std::log(u1));
  return std::polar(mag, 2.0 * std::numbers::pi * u2);
}

}  // namespace qsft
